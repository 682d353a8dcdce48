// Parameter recovery from the PARAFAC factors: 2-D DOD through the known
// RIS channel, coarse 2-D DOA via the vector cross product, refined DOA via
// integer phase disambiguation, and polarization angles.
//
// Sign convention: steering entries are e^{-j*psi} with psi = 2*pi*path/lambda,
// so extracted wrapped phases are negated before being compared against the
// predicted +psi values. The same convention is applied on the DOD side.
#ifndef RISLOC_ESTIMATION_HPP
#define RISLOC_ESTIMATION_HPP

#include <algorithm>
#include <numeric>
#include <vector>

#include "risloc/emvs.hpp"
#include "risloc/steering.hpp"
#include "risloc/types.hpp"

namespace risloc {

struct TargetEstimate {
    Angles dod;
    Angles doa_coarse;
    Angles doa_refined;
    Polarization pol;
    int column_index = 0;  // PARAFAC column; shared across all parameter groups
    bool pol_degenerate = false;
};

struct PhaseMatrixSet {
    MatrixXd wrapped;     // N x K, phases read off the factor, in (-pi, pi]
    MatrixXd predicted;   // N x K, phases predicted from the coarse direction
    Eigen::MatrixXi cycles;  // N x K integer wrap counts
    MatrixXd unwrapped;   // wrapped + 2*pi*cycles
};

struct EstimationDiagnostics {
    int arcsin_clamps = 0;
    int rounding_warnings = 0;  // entries where the wrap count sat near a half-integer
};

namespace detail {

inline Angles angles_from_xy(double x, double y, EstimationDiagnostics* diag) {
    double s = std::sqrt(x * x + y * y);
    if (s > 1.0) {
        s = 1.0;
        if (diag) ++diag->arcsin_clamps;
    }
    return {std::atan2(y, x), std::asin(s)};
}

// Moore-Penrose solve for possibly rank-deficient position matrices.
inline MatrixXd pinv_solve(const MatrixXd& a, const MatrixXd& b) {
    return a.completeOrthogonalDecomposition().solve(b);
}

}  // namespace detail

// Remove the per-column scaling ambiguity: divide each column by its row-6
// entry (first receive element, sixth EMVS component). The true value there
// is a_r(1,k) * b_k(6) with b_k(6) = sin(el)*cos(aux) real non-negative, so
// with the first receive element at the origin the normalized column equals
// the true column divided by b_k(6).
inline MatrixXcd normalize_receive_factor(const MatrixXcd& cr_hat) {
    MatrixXcd out = cr_hat;
    for (Eigen::Index k = 0; k < out.cols(); ++k) {
        cplx pivot = out(5, k);
        if (std::abs(pivot) < 1e-8 * out.col(k).norm())
            throw DegeneratePolarization(
                "vanishing sixth-component reference entry (elevation near 0 or aux near pi/2)");
        out.col(k) /= pivot;
    }
    return out;
}

// DOD chain: strip the known RIS modulation, normalize out the remaining
// column scale using the all-ones reference row, then invert the linear
// path-difference map by least squares.
inline std::vector<Angles> estimate_dod(const MatrixXcd& vt_hat, const MatrixXcd& g,
                                        const VectorXcd& w, const ArrayGeometry& geom,
                                        EstimationDiagnostics* diag = nullptr) {
    const Eigen::Index q_count = geom.num_ris();
    if (q_count > g.rows())
        throw RankDeficiency("RIS has more elements than transmit channels (Q > M)");
    MatrixXcd gw = g * w.asDiagonal();
    Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(gw);
    if (cod.rank() < q_count) throw RankDeficiency("G diag(w) is rank deficient");
    MatrixXcd at = cod.solve(vt_hat);
    for (Eigen::Index k = 0; k < at.cols(); ++k) at.col(k) /= at(0, k);

    MatrixXd omega(q_count, at.cols());
    for (Eigen::Index q = 0; q < q_count; ++q)
        for (Eigen::Index k = 0; k < at.cols(); ++k)
            omega(q, k) = -std::arg(at(q, k)) * geom.wavelength / (2.0 * kPi);

    MatrixXd rel = geom.ris.rowwise() - geom.ris.row(0);
    MatrixXd qt = detail::pinv_solve(rel, omega);

    std::vector<Angles> out;
    for (Eigen::Index k = 0; k < qt.cols(); ++k)
        out.push_back(detail::angles_from_xy(qt(0, k), qt(1, k), diag));
    return out;
}

struct CoarseDoa {
    std::vector<Angles> angles;
    MatrixXd directions;  // 3 x K unit direction estimates
};

// Vector cross-product estimate from the first receive element's six
// components. Any residual complex column scale cancels between the
// normalized electric part and the conjugated magnetic part.
inline CoarseDoa coarse_doa(const MatrixXcd& cr_norm, EstimationDiagnostics* diag = nullptr) {
    const Eigen::Index k_count = cr_norm.cols();
    CoarseDoa out;
    out.directions.resize(3, k_count);
    for (Eigen::Index k = 0; k < k_count; ++k) {
        Eigen::Vector3cd e = cr_norm.col(k).segment<3>(0);
        Eigen::Vector3cd m = cr_norm.col(k).segment<3>(3);
        const double en = e.norm(), mn = m.norm();
        if (en < 1e-12 || mn < 1e-12)
            throw DegenerateField("vanishing field block in receive factor");
        Eigen::Vector3cd q = (e / en).cross(m.conjugate() / mn);
        out.directions.col(k) = q.real();
        out.angles.push_back(
            detail::angles_from_xy(q.real()(0), q.real()(1), diag));
    }
    return out;
}

struct RefinedDoa {
    std::vector<Angles> angles;
    PhaseMatrixSet phases;
    MatrixXd directions;  // 3 x K refined direction estimates
};

// Phase disambiguation: the sixth-component rows carry the receive steering
// phase times a positive real factor. Their wrapped phases plus the integer
// cycle counts predicted by the coarse direction reconstruct the full
// (beyond lambda/2) phase field, which is then inverted by least squares.
// When force_zero_cycles is set the integer compensation is skipped; this is
// the deliberately crippled variant used to demonstrate the wrapping failure.
inline RefinedDoa refine_doa(const MatrixXcd& cr_norm, const MatrixXd& coarse_directions,
                             const ArrayGeometry& geom, EstimationDiagnostics* diag = nullptr,
                             bool force_zero_cycles = false) {
    const Eigen::Index n_count = geom.num_receive();
    const Eigen::Index k_count = cr_norm.cols();
    RefinedDoa out;
    out.phases.wrapped.resize(n_count, k_count);
    for (Eigen::Index n = 0; n < n_count; ++n)
        for (Eigen::Index k = 0; k < k_count; ++k)
            out.phases.wrapped(n, k) = -std::arg(cr_norm(6 * n + 5, k));

    out.phases.predicted = (2.0 * kPi / geom.wavelength) * (geom.receive * coarse_directions);
    out.phases.cycles.resize(n_count, k_count);
    out.phases.unwrapped.resize(n_count, k_count);
    for (Eigen::Index n = 0; n < n_count; ++n)
        for (Eigen::Index k = 0; k < k_count; ++k) {
            double frac = (out.phases.predicted(n, k) - out.phases.wrapped(n, k)) / (2.0 * kPi);
            int r = force_zero_cycles ? 0 : static_cast<int>(std::lround(frac));
            if (!force_zero_cycles && diag && std::abs(frac - std::lround(frac)) > 0.4)
                ++diag->rounding_warnings;
            out.phases.cycles(n, k) = r;
            out.phases.unwrapped(n, k) = out.phases.wrapped(n, k) + 2.0 * kPi * r;
        }

    // Solve for the direction plus a per-column offset: the pivot entry used
    // to normalize the factor column carries its own phase noise, which shifts
    // every element's phase by the same amount. Without the offset column that
    // common error would leak into the direction instead of being absorbed.
    MatrixXd design(n_count, 4);
    design.leftCols(3) = geom.receive;
    design.col(3).setOnes();
    MatrixXd qr = detail::pinv_solve(design,
                                     (geom.wavelength / (2.0 * kPi)) * out.phases.unwrapped)
                      .topRows(3);
    out.directions = qr;
    for (Eigen::Index k = 0; k < k_count; ++k)
        out.angles.push_back(detail::angles_from_xy(qr(0, k), qr(1, k), diag));
    return out;
}

// Polarization from the first receive element's response block: divide out
// the reference steering entry rebuilt from the refined direction, then
// invert the direction-dependent matrix.
inline std::vector<Polarization> estimate_polarization(const MatrixXcd& cr_norm,
                                                       const std::vector<Angles>& refined,
                                                       const ArrayGeometry& geom,
                                                       std::vector<bool>* degenerate_flags = nullptr) {
    const Eigen::Index k_count = cr_norm.cols();
    std::vector<Polarization> out;
    if (degenerate_flags) degenerate_flags->assign(static_cast<std::size_t>(k_count), false);
    for (Eigen::Index k = 0; k < k_count; ++k) {
        const Angles& a = refined[static_cast<std::size_t>(k)];
        double ref_path = geom.receive.row(0).dot(unit_direction(a));
        cplx ref = std::polar(1.0, -2.0 * kPi * ref_path / geom.wavelength);
        Vector6cd b = cr_norm.col(k).head<6>() / ref;
        Matrix62cd v = emvs_direction_matrix(a);
        Eigen::Vector2cd gk = v.completeOrthogonalDecomposition().solve(b);
        if (std::abs(gk(1)) < 1e-10) {
            out.push_back({kPi / 2.0, 0.0});
            if (degenerate_flags) (*degenerate_flags)[static_cast<std::size_t>(k)] = true;
            continue;
        }
        cplx ratio = gk(0) / gk(1);
        out.push_back({std::atan(std::abs(ratio)), std::arg(ratio)});
    }
    return out;
}

namespace detail {

inline double angle_error_sq(const Angles& est, const Angles& truth) {
    double da = wrap_phase(est.azimuth - truth.azimuth);
    double de = est.elevation - truth.elevation;
    return da * da + de * de;
}

inline double match_cost(const TargetEstimate& e, const Target& t) {
    return angle_error_sq(e.dod, t.dod) + angle_error_sq(e.doa_refined, t.doa);
}

}  // namespace detail

// Permutation p with p[i] = index into `truth` matched to estimates[i],
// minimizing the total squared angular error over DOD and refined DOA.
// Exhaustive for K <= 8, greedy nearest-neighbor beyond.
inline std::vector<int> match_to_truth(const std::vector<TargetEstimate>& estimates,
                                       const std::vector<Target>& truth) {
    const std::size_t k = estimates.size();
    if (k != truth.size()) throw ConfigError("match_to_truth: size mismatch");
    std::vector<int> best(k);
    std::iota(best.begin(), best.end(), 0);
    if (k <= 8) {
        std::vector<int> perm = best;
        double best_cost = std::numeric_limits<double>::infinity();
        do {
            double cost = 0.0;
            for (std::size_t i = 0; i < k; ++i)
                cost += detail::match_cost(estimates[i], truth[static_cast<std::size_t>(perm[i])]);
            if (cost < best_cost) {
                best_cost = cost;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    std::vector<bool> used(k, false);
    for (std::size_t i = 0; i < k; ++i) {
        double best_cost = std::numeric_limits<double>::infinity();
        int pick = -1;
        for (std::size_t j = 0; j < k; ++j) {
            if (used[j]) continue;
            double c = detail::match_cost(estimates[i], truth[j]);
            if (c < best_cost) {
                best_cost = c;
                pick = static_cast<int>(j);
            }
        }
        used[static_cast<std::size_t>(pick)] = true;
        best[i] = pick;
    }
    return best;
}

}  // namespace risloc

#endif
