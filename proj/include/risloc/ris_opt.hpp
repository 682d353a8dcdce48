// RIS phase-shift design: received-power quadratic form, unit-diagonal SDP
// relaxation, and Gaussian randomization back to the unit-modulus set.
//
// The SDP  max tr(Phi X) s.t. diag(X) = 1, X >= 0  is solved by a barrier
// path-following method on the dual  min sum(y) s.t. Diag(y) - Phi >= 0,
// whose barrier subproblems are smooth Q-dimensional Newton solves. The
// primal iterate X = mu * S^{-1} converges to the optimum with duality gap
// mu * Q; both sides are strictly feasible so strong duality holds.
#ifndef RISLOC_RIS_OPT_HPP
#define RISLOC_RIS_OPT_HPP

#include <vector>

#include "risloc/rng.hpp"
#include "risloc/tensor.hpp"

namespace risloc {

struct QuadraticForm {
    MatrixXcd phi;  // Q x Q Hermitian PSD
};

struct SdpOptions {
    double rel_gap_tol = 1e-8;
    int max_outer = 200;
    int max_newton = 60;
    int draws = 200;
};

struct SdpSolution {
    MatrixXcd X;
    double objective = 0.0;
    double gap = 0.0;
    int rank_numeric = 0;
    VectorXcd w_extracted;
    double extracted_objective = 0.0;
    int randomization_draws = 0;
    bool stalled = false;
};

// Quadratic form of the received signal power in the RIS phases:
//   w^H Phi w = || [G diag(w) A_t kr C] U ||_F^2
// assembled from the Gram matrices of U and C. gram_u is the snapshot Gram
// taken with U in L x K orientation, i.e. gram_u(i,j) = u_i^H u_j summed
// over snapshots.
inline QuadraticForm build_phi(const MatrixXcd& gram_u, const MatrixXcd& c, const MatrixXcd& g,
                               const MatrixXcd& at) {
    const Eigen::Index k_count = at.cols();
    if (gram_u.rows() != k_count || gram_u.cols() != k_count || c.cols() != k_count)
        throw ConfigError("build_phi: dimension mismatch");
    if (g.cols() != at.rows()) throw ConfigError("build_phi: G / A_t dimension mismatch");
    MatrixXcd gram_g = g.adjoint() * g;
    MatrixXcd gram_c = c.adjoint() * c;
    MatrixXcd phi = MatrixXcd::Zero(at.rows(), at.rows());
    for (Eigen::Index i = 0; i < k_count; ++i)
        for (Eigen::Index j = 0; j < k_count; ++j) {
            cplx coeff = gram_u(i, j) * gram_c(i, j);
            phi.noalias() +=
                coeff * gram_g.cwiseProduct(at.col(i).conjugate() * at.col(j).transpose());
        }
    phi = 0.5 * (phi + phi.adjoint()).eval();
    return {phi};
}

inline QuadraticForm build_phi_from_factors(const MatrixXcd& u, const MatrixXcd& c,
                                            const MatrixXcd& g, const MatrixXcd& at) {
    // U is K x L here; the snapshot Gram is conj(U) * U^T.
    return build_phi(u.conjugate() * u.transpose(), c, g, at);
}

// Direct evaluation of the power objective; used as the oracle counterpart
// of build_phi and for scoring randomization candidates.
inline double received_power(const VectorXcd& w, const MatrixXcd& u, const MatrixXcd& c,
                             const MatrixXcd& g, const MatrixXcd& at) {
    MatrixXcd vt = g * w.asDiagonal() * at;
    return (khatri_rao(vt, c) * u).squaredNorm();
}

inline double quadratic_objective(const QuadraticForm& phi, const VectorXcd& w) {
    return std::real(w.dot(phi.phi * w));
}

namespace detail {

struct DualBarrierState {
    VectorXd y;
    MatrixXcd s_inv;
    bool ok = false;
};

inline bool dual_feasible(const MatrixXcd& phi, const VectorXd& y, Eigen::LLT<MatrixXcd>& llt) {
    MatrixXcd s = MatrixXcd(y.asDiagonal()) - phi;
    llt.compute(s);
    return llt.info() == Eigen::Success;
}

}  // namespace detail

// Solve max tr(Phi X), diag(X) = 1, X PSD. Returns the primal matrix with
// exactly unit diagonal and the achieved duality gap.
inline SdpSolution solve_sdp(const QuadraticForm& form, const SdpOptions& opts = {}) {
    const MatrixXcd& phi = form.phi;
    const Eigen::Index q = phi.rows();
    if ((phi - phi.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + phi.cwiseAbs().maxCoeff()))
        throw ConfigError("solve_sdp: Phi is not Hermitian");

    SdpSolution sol;
    VectorXd y(q);
    for (Eigen::Index i = 0; i < q; ++i)
        y[i] = phi.row(i).cwiseAbs().sum() + 1.0;  // diagonally dominant start, S > 0

    Eigen::LLT<MatrixXcd> llt;
    double mu = 1.0 + std::abs(std::real(phi.trace())) / std::max<double>(1, q);
    double last_gap = std::numeric_limits<double>::infinity();
    int stagnant = 0;

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        // Newton iterations on the barrier subproblem at this mu.
        for (int it = 0; it < opts.max_newton; ++it) {
            MatrixXcd s = MatrixXcd(y.asDiagonal()) - phi;
            llt.compute(s);
            if (llt.info() != Eigen::Success)
                throw IllConditioned("solve_sdp: dual iterate left the PSD cone");
            MatrixXcd s_inv = llt.solve(MatrixXcd::Identity(q, q));
            VectorXd grad = VectorXd::Ones(q) - mu * s_inv.diagonal().real();
            MatrixXd hess = mu * s_inv.cwiseAbs2();
            VectorXd step = hess.ldlt().solve(grad);
            double decrement = grad.dot(step);
            double alpha = 1.0;
            VectorXd y_next = y - alpha * step;
            while (alpha > 1e-12 && !detail::dual_feasible(phi, y_next, llt)) {
                alpha *= 0.5;
                y_next = y - alpha * step;
            }
            y = y_next;
            if (decrement < 1e-12) break;
        }

        MatrixXcd s = MatrixXcd(y.asDiagonal()) - phi;
        llt.compute(s);
        MatrixXcd s_inv = llt.solve(MatrixXcd::Identity(q, q));
        MatrixXcd x = mu * s_inv;
        // Force the unit diagonal exactly; a congruence by a positive
        // diagonal keeps positive semidefiniteness.
        VectorXd d = x.diagonal().real().cwiseMax(1e-300).cwiseSqrt();
        x = d.cwiseInverse().asDiagonal() * x * d.cwiseInverse().asDiagonal();
        double obj = std::real((phi * x).trace());
        double gap = y.sum() - obj;
        if (gap < last_gap - 1e-14 * (1.0 + std::abs(obj)))
            stagnant = 0;
        else
            ++stagnant;
        last_gap = gap;
        sol.X = x;
        sol.objective = obj;
        sol.gap = gap;
        if (gap < opts.rel_gap_tol * (1.0 + std::abs(obj))) break;
        if (stagnant > 50) {
            sol.stalled = true;
            break;
        }
        mu *= 0.3;
    }

    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sol.X);
    const VectorXd& ev = eig.eigenvalues();
    double ev_max = ev.cwiseAbs().maxCoeff();
    sol.rank_numeric = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > 1e-8 * ev_max) ++sol.rank_numeric;
    return sol;
}

// Gaussian randomization: factor X through its eigendecomposition (clipping
// tiny negative eigenvalues), draw complex normal vectors, and project each
// candidate onto the unit-modulus set. Returns the best candidate under the
// quadratic objective.
inline std::pair<VectorXcd, double> randomize(const MatrixXcd& x, const QuadraticForm& form,
                                              int draws, Rng& rng) {
    const Eigen::Index q = x.rows();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(x);
    VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    const double ev_max = ev.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > 1e-12 * ev_max) keep.push_back(i);
    MatrixXcd v(keep.size(), q);  // X = V^H V
    for (std::size_t r = 0; r < keep.size(); ++r)
        v.row(static_cast<Eigen::Index>(r)) =
            std::sqrt(ev[keep[r]]) * eig.eigenvectors().col(keep[r]).adjoint();

    VectorXcd best_w = VectorXcd::Ones(q);
    double best_obj = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < draws; ++l) {
        VectorXcd z(v.rows());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.cgauss();
        VectorXcd cand = v.adjoint() * z;
        VectorXcd w(q);
        for (Eigen::Index i = 0; i < q; ++i) w[i] = std::polar(1.0, std::arg(cand[i]));
        double obj = quadratic_objective(form, w);
        if (obj > best_obj) {
            best_obj = obj;
            best_w = w;
        }
    }
    return {best_w, best_obj};
}

// Full design pass: quadratic form from the current factor estimates, SDP
// relaxation, randomized extraction. The incumbent phases are kept whenever
// they already score at least as well.
inline SdpSolution optimize_phases(const MatrixXcd& at_hat, const MatrixXcd& c_hat,
                                   const MatrixXcd& u_hat, const MatrixXcd& g,
                                   const VectorXcd& w_current, std::uint64_t seed,
                                   const SdpOptions& opts = {}) {
    // u_hat is L x K (PARAFAC orientation).
    QuadraticForm form = build_phi(u_hat.adjoint() * u_hat, c_hat, g, at_hat);
    SdpSolution sol = solve_sdp(form, opts);
    Rng rng(seed);
    auto [w, obj] = randomize(sol.X, form, opts.draws, rng);
    sol.randomization_draws = opts.draws;
    double current_obj = quadratic_objective(form, w_current);
    if (current_obj >= obj) {
        sol.w_extracted = w_current;
        sol.extracted_objective = current_obj;
    } else {
        sol.w_extracted = w;
        sol.extracted_objective = obj;
    }
    return sol;
}

}  // namespace risloc

#endif
