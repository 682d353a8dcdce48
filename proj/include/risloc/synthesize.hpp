// Snapshot synthesis for the RIS-aided bistatic EMVS-MIMO model.
// The noiseless observation is [V_t kr A_r kr B] U reshaped to M x 6N x L,
// with V_t = G diag(w) A_t and B formed from the receive-side EMVS responses.
#ifndef RISLOC_SYNTHESIZE_HPP
#define RISLOC_SYNTHESIZE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "risloc/emvs.hpp"
#include "risloc/rng.hpp"
#include "risloc/steering.hpp"
#include "risloc/tensor.hpp"

namespace risloc {

struct SnapshotTensor {
    Tensor3 data;  // M x 6N x L
    Eigen::Index M = 0, N = 0, L = 0, K = 0;
};

struct SynthesisResult {
    SnapshotTensor tensor;
    MatrixXcd U;        // K x L reflection coefficients (ground truth)
    MatrixXcd G;        // M x Q channel
    MatrixXcd At;       // Q x K transmit-side steering
    MatrixXcd Ar;       // N x K receive steering
    MatrixXcd B;        // 6 x K polarization responses
    MatrixXcd Vt;       // M x K = G diag(w) At
    MatrixXcd Cr;       // 6N x K = Ar kr B
    double sigma2 = 0.0;
    double noiseless_power = 0.0;  // mean |entry|^2 of the clean tensor
    std::vector<std::string> warnings;
};

namespace detail {

inline void warn_if_rank_deficient(const MatrixXcd& m, const char* name,
                                   std::vector<std::string>& warnings) {
    Eigen::JacobiSVD<MatrixXcd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() > 0 && s[s.size() - 1] < 1e-10 * s[0])
        warnings.push_back(std::string("numerically rank-deficient factor: ") + name);
}

}  // namespace detail

// sigma2_override < 0 means "derive the noise power from scene.snr_db";
// a non-negative value pins sigma2 directly, which keeps the noise floor
// comparable across scenes whose signal power differs (phase comparisons).
inline SynthesisResult synthesize(const SceneConfig& scene, double sigma2_override = -1.0) {
    scene.validate();
    const Eigen::Index m_count = scene.geometry.num_transmit();
    const Eigen::Index n_count = scene.geometry.num_receive();
    const Eigen::Index k_count = scene.num_targets();
    const Eigen::Index l_count = scene.snapshots;

    std::vector<Angles> dods, doas;
    for (const Target& t : scene.targets) {
        dods.push_back(t.dod);
        doas.push_back(t.doa);
    }

    SynthesisResult out;
    out.G = ris_channel(scene.geometry);
    out.At = transmit_steering(scene.geometry, dods).matrix;
    out.Ar = receive_steering(scene.geometry, doas).matrix;
    out.B.resize(6, k_count);
    for (Eigen::Index k = 0; k < k_count; ++k)
        out.B.col(k) = emvs_response(scene.targets[static_cast<std::size_t>(k)].doa,
                                     scene.targets[static_cast<std::size_t>(k)].pol);
    out.Vt = out.G * scene.ris_phases.asDiagonal() * out.At;
    out.Cr = khatri_rao(out.Ar, out.B);

    Rng rng(scene.rng_seed);
    out.U = rng.cgauss_matrix(k_count, l_count);

    detail::warn_if_rank_deficient(out.Vt, "V_t", out.warnings);
    detail::warn_if_rank_deficient(out.Cr, "C_r", out.warnings);
    detail::warn_if_rank_deficient(out.U, "U", out.warnings);

    MatrixXcd clean = khatri_rao(out.Vt, out.Cr) * out.U;  // (M*6N) x L
    out.noiseless_power = clean.squaredNorm() / static_cast<double>(clean.size());

    if (sigma2_override >= 0.0 || std::isfinite(scene.snr_db)) {
        out.sigma2 = sigma2_override >= 0.0
                         ? sigma2_override
                         : out.noiseless_power / std::pow(10.0, scene.snr_db / 10.0);
        const double s = std::sqrt(out.sigma2);
        for (Eigen::Index l = 0; l < clean.cols(); ++l)
            for (Eigen::Index i = 0; i < clean.rows(); ++i) clean(i, l) += s * rng.cgauss();
    }

    out.tensor.data = fold(clean, 3, m_count, 6 * n_count, l_count);
    out.tensor.M = m_count;
    out.tensor.N = n_count;
    out.tensor.L = l_count;
    out.tensor.K = k_count;
    return out;
}

}  // namespace risloc

#endif
