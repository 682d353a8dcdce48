// Trilinear alternating least squares for the third-order PARAFAC model
// Z = sum_k vt_k o cr_k o u_k. Each sweep solves the three exact LS
// subproblems in a fixed cyclic order; every solve goes through a
// rank-revealing orthogonal decomposition, never normal equations.
#ifndef RISLOC_PARAFAC_HPP
#define RISLOC_PARAFAC_HPP

#include <limits>
#include <vector>

#include "risloc/rng.hpp"
#include "risloc/synthesize.hpp"
#include "risloc/tensor.hpp"

namespace risloc {

enum class TalsInit { random, svd_slices };

struct TalsOptions {
    int max_iters = 500;
    double rel_fit_tol = 1e-10;
    // Maximum number of restarts. The loop stops early once two independent
    // initializations reach the same best fit within restart_agreement_tol
    // (relative), or once the fit hits machine precision; extra restarts only
    // run when a draw lands in a worse local optimum.
    int restarts = 5;
    double restart_agreement_tol = 1e-3;
    TalsInit init_mode = TalsInit::random;

    void validate() const {
        if (max_iters < 1 || restarts < 1 || rel_fit_tol <= 0.0 || restart_agreement_tol <= 0.0)
            throw ConfigError("invalid TALS options");
    }
};

struct FactorEstimate {
    MatrixXcd Vt_hat;  // M x K
    MatrixXcd Cr_hat;  // 6N x K
    MatrixXcd U_hat;   // L x K
    std::vector<double> fit_history;
    bool converged = false;
    double fit = std::numeric_limits<double>::infinity();
    bool kruskal_ok = true;
};

namespace detail {

// LS solve X = pinv(A) * B through a complete orthogonal decomposition.
inline MatrixXcd ls_solve(const MatrixXcd& a, const MatrixXcd& b, Eigen::Index expected_rank) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(a);
    if (cod.rank() < expected_rank)
        throw IllConditioned("Khatri-Rao product is numerically rank deficient");
    return cod.solve(b);
}

inline Eigen::Index kruskal_rank(const MatrixXcd& m) {
    // Full column rank implies k-rank = column count; otherwise fall back to
    // the numerical rank as a cheap lower-bound proxy.
    Eigen::JacobiSVD<MatrixXcd> svd(m);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > 1e-10 * s[0]) ++r;
    return r;
}

struct GevdInit {
    MatrixXcd vt, cr, u;
    bool ok = false;
};

// Direct trilinear initialization: two random mixtures of parallel slices
// form a matrix pencil whose generalized eigenvectors reveal one factor in
// closed form; the other two follow from a least-squares fit plus per-column
// rank-one truncation. Exact on noiseless data, which sidesteps the slow
// "swamp" regime of alternating least squares when a factor is poorly
// conditioned. Falls back (ok = false) when no mode pair can hold K columns.
inline GevdInit gevd_init(const Tensor3& t, const MatrixXcd& z1, const MatrixXcd& z2,
                          Eigen::Index k, Rng& rng) {
    const Eigen::Index d0 = t.dim(0), d1 = t.dim(1), d2 = t.dim(2);
    GevdInit out;
    const bool front = k <= std::min(d0, d1) && d2 >= 2;  // pencil in the d0 x d1 plane
    const bool side = !front && k <= std::min(d1, d2) && d0 >= 2;
    if (!front && !side) return out;

    MatrixXcd t1, t2;
    if (front) {
        t1 = MatrixXcd::Zero(d0, d1);
        t2 = MatrixXcd::Zero(d0, d1);
        for (Eigen::Index l = 0; l < d2; ++l) {
            const cplx a = rng.cgauss(), b = rng.cgauss();
            for (Eigen::Index j = 0; j < d1; ++j)
                for (Eigen::Index i = 0; i < d0; ++i) {
                    t1(i, j) += a * t(i, j, l);
                    t2(i, j) += b * t(i, j, l);
                }
        }
    } else {
        t1 = MatrixXcd::Zero(d1, d2);
        t2 = MatrixXcd::Zero(d1, d2);
        for (Eigen::Index l = 0; l < d2; ++l)
            for (Eigen::Index j = 0; j < d1; ++j)
                for (Eigen::Index i = 0; i < d0; ++i) {
                    const cplx v = t(i, j, l);
                    // Mixture weights depend only on the sliced mode index.
                    t1(j, l) += std::polar(1.0, 0.7 + 1.1 * static_cast<double>(i)) * v;
                    t2(j, l) += std::polar(1.0, 2.3 - 0.9 * static_cast<double>(i)) * v;
                }
    }

    Eigen::BDCSVD<MatrixXcd> svd(t1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(k - 1) < 1e-12 * sv(0)) return out;
    MatrixXcd p = svd.matrixU().leftCols(k), q = svd.matrixV().leftCols(k);
    MatrixXcd m1 = p.adjoint() * t1 * q, m2 = p.adjoint() * t2 * q;
    Eigen::FullPivLU<MatrixXcd> lu(m2);
    if (!lu.isInvertible()) return out;
    Eigen::ComplexEigenSolver<MatrixXcd> es(m1 * lu.inverse());
    if (es.info() != Eigen::Success) return out;
    MatrixXcd left = p * es.eigenvectors();

    if (front) {
        out.vt = left;  // d0 x k
        Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(out.vt);
        if (cod.rank() < k) return out;
        MatrixXcd w = cod.solve(z1.transpose()).transpose();  // (d1*d2) x k
        out.cr.resize(d1, k);
        out.u.resize(d2, k);
        for (Eigen::Index r = 0; r < k; ++r) {
            MatrixXcd y(d1, d2);
            for (Eigen::Index j = 0; j < d1; ++j)
                for (Eigen::Index l = 0; l < d2; ++l) y(j, l) = w(j * d2 + l, r);
            Eigen::BDCSVD<MatrixXcd> ysvd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
            out.cr.col(r) = ysvd.singularValues()(0) * ysvd.matrixU().col(0);
            out.u.col(r) = ysvd.matrixV().col(0).conjugate();
        }
    } else {
        out.cr = left;  // d1 x k
        Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(out.cr);
        if (cod.rank() < k) return out;
        MatrixXcd w = cod.solve(z2.transpose()).transpose();  // (d2*d0) x k
        out.vt.resize(d0, k);
        out.u.resize(d2, k);
        for (Eigen::Index r = 0; r < k; ++r) {
            MatrixXcd y(d0, d2);
            for (Eigen::Index i = 0; i < d0; ++i)
                for (Eigen::Index l = 0; l < d2; ++l) y(i, l) = w(l * d0 + i, r);
            Eigen::BDCSVD<MatrixXcd> ysvd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
            out.vt.col(r) = ysvd.singularValues()(0) * ysvd.matrixU().col(0);
            out.u.col(r) = ysvd.matrixV().col(0).conjugate();
        }
    }
    out.ok = true;
    return out;
}

}  // namespace detail

inline FactorEstimate tals(const SnapshotTensor& z, Eigen::Index k, const TalsOptions& opts,
                           std::uint64_t seed) {
    opts.validate();
    const Eigen::Index d0 = z.data.dim(0), d1 = z.data.dim(1), d2 = z.data.dim(2);
    if (k < 1) throw ConfigError("tals: K must be positive");

    const MatrixXcd z1 = unfold(z.data, 1);
    const MatrixXcd z2 = unfold(z.data, 2);
    const MatrixXcd z3 = unfold(z.data, 3);
    const double znorm = z.data.norm();
    if (znorm == 0.0) throw ConfigError("tals: zero tensor");

    FactorEstimate best;
    std::vector<double> restart_fits;
    for (int r = 0; r < opts.restarts; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        MatrixXcd vt, cr, u;
        bool seeded = false;
        if (opts.init_mode == TalsInit::svd_slices) {
            detail::GevdInit gi = detail::gevd_init(z.data, z1, z2, k, rng);
            if (gi.ok) {
                vt = gi.vt;
                cr = gi.cr;
                u = gi.u;
                seeded = true;
            }
        }
        if (!seeded) {
            vt = rng.cgauss_matrix(d0, k);
            cr = rng.cgauss_matrix(d1, k);
            u = rng.cgauss_matrix(d2, k);
        }

        FactorEstimate est;
        double prev_fit = std::numeric_limits<double>::infinity();
        try {
            for (int it = 0; it < opts.max_iters; ++it) {
                vt = detail::ls_solve(khatri_rao(cr, u), z1, k).transpose();
                cr = detail::ls_solve(khatri_rao(u, vt), z2, k).transpose();
                MatrixXcd kr3 = khatri_rao(vt, cr);
                u = detail::ls_solve(kr3, z3, k).transpose();
                double fit = (z3 - kr3 * u.transpose()).norm() / znorm;
                est.fit_history.push_back(fit);
                if (fit < 1e-14 ||
                    (std::isfinite(prev_fit) &&
                     std::abs(prev_fit - fit) / std::max(prev_fit, 1e-300) < opts.rel_fit_tol)) {
                    est.converged = true;
                    prev_fit = fit;
                    break;
                }
                prev_fit = fit;
            }
        } catch (const IllConditioned&) {
            if (r + 1 == opts.restarts && !best.fit_history.empty()) break;
            if (r + 1 == opts.restarts && best.fit_history.empty()) throw;
            continue;
        }
        est.Vt_hat = vt;
        est.Cr_hat = cr;
        est.U_hat = u;
        est.fit = est.fit_history.empty() ? std::numeric_limits<double>::infinity()
                                          : est.fit_history.back();
        restart_fits.push_back(est.fit);
        if (est.fit < best.fit) best = est;
        if (best.fit < 1e-8) break;
        int agreeing = 0;
        for (double f : restart_fits)
            if (f <= best.fit * (1.0 + opts.restart_agreement_tol)) ++agreeing;
        if (agreeing >= 2) break;
    }

    if (best.fit_history.empty()) throw IllConditioned("tals: no restart produced a solution");
    best.kruskal_ok = detail::kruskal_rank(best.Vt_hat) + detail::kruskal_rank(best.Cr_hat) +
                          detail::kruskal_rank(best.U_hat) >=
                      2 * k + 2;
    return best;
}

}  // namespace risloc

#endif
