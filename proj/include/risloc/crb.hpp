// Deterministic Cramer-Rao bound for the 6K parameters
// Theta = [theta_t, theta_r, phi_t, phi_r, zeta, rho] (K entries per group).
// Derivatives of the rank-one signature columns f_k = v_tk kron a_rk kron b_k
// are assembled analytically via the chain rule through the path-difference
// matrices and the EMVS direction matrix.
#ifndef RISLOC_CRB_HPP
#define RISLOC_CRB_HPP

#include <vector>

#include "risloc/emvs.hpp"
#include "risloc/steering.hpp"
#include "risloc/tensor.hpp"

namespace risloc {

struct JacobianStack {
    MatrixXcd F;   // 6MN x K signature columns
    MatrixXcd Fd;  // 6MN x 6K derivative blocks in group order
};

struct CrbResult {
    MatrixXd fim;  // 6K x 6K
    MatrixXd crb;  // 6K x 6K
    // Diagonal bounds grouped as rows {theta_t, theta_r, phi_t, phi_r, zeta, rho},
    // K columns each, radians^2.
    MatrixXd per_parameter_bounds;
    bool singular = false;
};

namespace detail {

inline Vector3d ddirection_dazimuth(const Angles& a) {
    return {-std::sin(a.azimuth) * std::sin(a.elevation),
            std::cos(a.azimuth) * std::sin(a.elevation), 0.0};
}

inline Vector3d ddirection_delevation(const Angles& a) {
    return {std::cos(a.azimuth) * std::cos(a.elevation),
            std::sin(a.azimuth) * std::cos(a.elevation), -std::sin(a.elevation)};
}

inline Matrix62cd dV_dazimuth(const Angles& a) {
    const double ct = std::cos(a.azimuth), st = std::sin(a.azimuth);
    const double cp = std::cos(a.elevation);
    Matrix62cd d;
    d << -st * cp, -ct,
         ct * cp,  -st,
         0.0,      0.0,
         -ct,      st * cp,
         -st,      -ct * cp,
         0.0,      0.0;
    return d;
}

inline Matrix62cd dV_delevation(const Angles& a) {
    const double ct = std::cos(a.azimuth), st = std::sin(a.azimuth);
    const double cp = std::cos(a.elevation), sp = std::sin(a.elevation);
    Matrix62cd d;
    d << -ct * sp, 0.0,
         -st * sp, 0.0,
         -cp,      0.0,
         0.0,      ct * sp,
         0.0,      st * sp,
         0.0,      cp;
    return d;
}

inline Eigen::Vector2cd dg_daux(const Polarization& p) {
    Eigen::Vector2cd d;
    d << std::cos(p.aux) * std::polar(1.0, p.phase), -std::sin(p.aux);
    return d;
}

inline Eigen::Vector2cd dg_dphase(const Polarization& p) {
    Eigen::Vector2cd d;
    d << cplx(0.0, 1.0) * std::sin(p.aux) * std::polar(1.0, p.phase), 0.0;
    return d;
}

inline VectorXcd kron3(const VectorXcd& a, const VectorXcd& b, const VectorXcd& c) {
    VectorXcd bc(b.size() * c.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) bc.segment(i * c.size(), c.size()) = b[i] * c;
    VectorXcd out(a.size() * bc.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * bc.size(), bc.size()) = a[i] * bc;
    return out;
}

}  // namespace detail

inline JacobianStack build_jacobians(const SceneConfig& scene) {
    scene.validate();
    const ArrayGeometry& geom = scene.geometry;
    const Eigen::Index k_count = scene.num_targets();
    const Eigen::Index dim = geom.num_transmit() * 6 * geom.num_receive();
    const double wave_rate = -2.0 * kPi / geom.wavelength;  // d(phase)/d(path)

    MatrixXcd g = ris_channel(geom);
    MatrixXcd gw = g * scene.ris_phases.asDiagonal();
    MatrixXd ris_rel = geom.ris.rowwise() - geom.ris.row(0);

    JacobianStack out;
    out.F.resize(dim, k_count);
    out.Fd.resize(dim, 6 * k_count);

    for (Eigen::Index k = 0; k < k_count; ++k) {
        const Target& t = scene.targets[static_cast<std::size_t>(k)];
        Vector3d qt = unit_direction(t.dod);
        Vector3d qr = unit_direction(t.doa);

        VectorXd omega = ris_rel * qt;
        VectorXcd at = (cplx(0, 1) * wave_rate * omega).array().exp();
        VectorXcd vt = gw * at;
        VectorXd psi = geom.receive * qr;
        VectorXcd ar = (cplx(0, 1) * wave_rate * psi).array().exp();
        Matrix62cd v = emvs_direction_matrix(t.doa);
        Eigen::Vector2cd gk = polarization_vector(t.pol);
        Vector6cd b = v * gk;

        out.F.col(k) = detail::kron3(vt, ar, b);

        auto dat = [&](const Vector3d& dq) -> VectorXcd {
            VectorXd domega = ris_rel * dq;
            return gw * (cplx(0, 1) * wave_rate * domega.cast<cplx>().array() * at.array()).matrix();
        };
        auto dar = [&](const Vector3d& dq) -> VectorXcd {
            VectorXd dpsi = geom.receive * dq;
            return (cplx(0, 1) * wave_rate * dpsi.cast<cplx>().array() * ar.array()).matrix();
        };

        // theta_t and phi_t act through the transmit-side factor only.
        out.Fd.col(0 * k_count + k) =
            detail::kron3(dat(detail::ddirection_dazimuth(t.dod)), ar, b);
        out.Fd.col(2 * k_count + k) =
            detail::kron3(dat(detail::ddirection_delevation(t.dod)), ar, b);

        // theta_r and phi_r act through both the receive steering and the
        // EMVS response.
        Vector6cd db_daz = detail::dV_dazimuth(t.doa) * gk;
        Vector6cd db_del = detail::dV_delevation(t.doa) * gk;
        out.Fd.col(1 * k_count + k) =
            detail::kron3(vt, dar(detail::ddirection_dazimuth(t.doa)), b) +
            detail::kron3(vt, ar, db_daz);
        out.Fd.col(3 * k_count + k) =
            detail::kron3(vt, dar(detail::ddirection_delevation(t.doa)), b) +
            detail::kron3(vt, ar, db_del);

        out.Fd.col(4 * k_count + k) = detail::kron3(vt, ar, Vector6cd(v * detail::dg_daux(t.pol)));
        out.Fd.col(5 * k_count + k) =
            detail::kron3(vt, ar, Vector6cd(v * detail::dg_dphase(t.pol)));
    }
    return out;
}

// CRB = (sigma^2 / 2L) [ Re( (Fd^H P_F_perp Fd) had (1_{6x6} kron R_U^T) ) ]^{-1}
// with P_F_perp the orthogonal projector onto the complement of span(F) and
// r_u the K x K snapshot correlation U U^H / L of the K x L reflection
// coefficient matrix.
inline CrbResult compute_crb(const SceneConfig& scene, double sigma2, const MatrixXcd& r_u) {
    const Eigen::Index k_count = scene.num_targets();
    JacobianStack j = build_jacobians(scene);

    Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(j.F);
    if (cod.rank() < k_count) throw RankDeficiency("signature matrix F is rank deficient");
    MatrixXcd proj_fd = j.Fd - j.F * cod.solve(j.Fd);  // P_F_perp * Fd

    MatrixXcd rutc = r_u.transpose();
    MatrixXcd core = j.Fd.adjoint() * proj_fd;
    MatrixXcd masked(6 * k_count, 6 * k_count);
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
            masked.block(a * k_count, b * k_count, k_count, k_count) =
                core.block(a * k_count, b * k_count, k_count, k_count).cwiseProduct(rutc);

    CrbResult res;
    res.fim = (2.0 * scene.snapshots / sigma2) * masked.real();
    res.fim = 0.5 * (res.fim + res.fim.transpose()).eval();

    Eigen::FullPivLU<MatrixXd> lu(res.fim);
    Eigen::JacobiSVD<MatrixXd> svd(res.fim);
    const auto& s = svd.singularValues();
    if (s[s.size() - 1] < 1e-12 * s[0]) {
        res.singular = true;
        res.crb = res.fim.completeOrthogonalDecomposition().pseudoInverse();
    } else {
        res.crb = lu.inverse();
    }

    res.per_parameter_bounds.resize(6, k_count);
    for (int a = 0; a < 6; ++a)
        for (Eigen::Index k = 0; k < k_count; ++k)
            res.per_parameter_bounds(a, k) = res.crb(a * k_count + k, a * k_count + k);
    return res;
}

}  // namespace risloc

#endif
