// Monte Carlo harness: single-trial pipeline (synthesize, decompose,
// estimate, match) and the sweep experiments built on top of it, with
// deterministic per-trial seeding so thread count never changes results.
#ifndef RISLOC_HARNESS_HPP
#define RISLOC_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "risloc/crb.hpp"
#include "risloc/estimation.hpp"
#include "risloc/parafac.hpp"
#include "risloc/ris_opt.hpp"
#include "risloc/scenario.hpp"
#include "risloc/synthesize.hpp"

namespace risloc {

// Row order for per-parameter error and bound matrices, matching
// CrbResult::per_parameter_bounds.
inline const char* parameter_name(int row) {
    static const char* names[6] = {"theta_t", "theta_r", "phi_t", "phi_r", "zeta", "rho"};
    return names[row];
}

struct TrialOptions {
    TalsOptions tals;
    bool want_crb = false;
    bool force_zero_cycles = false;   // cripple phase disambiguation
    double sigma2_override = -1.0;    // < 0: derive from the scene SNR
};

struct TrialResult {
    bool ok = false;
    std::string error;
    MatrixXd err;         // 6 x K absolute errors, degrees; column = truth index
    MatrixXd err_coarse;  // 2 x K {theta_r, phi_r} coarse errors, degrees
    double fit = 0.0;
    bool converged = false;
    int rounding_warnings = 0;
    int arcsin_clamps = 0;
    double sigma2 = 0.0;
    int mis_associations = 0;
    MatrixXd crb_deg;     // 6 x K root bounds, degrees; empty unless requested
    bool crb_singular = false;
    std::vector<TargetEstimate> estimates;
    std::vector<int> permutation;  // estimate i explains truth permutation[i]
    MatrixXcd cr_norm;    // normalized receive factor, kept for phase design
};

namespace detail {

inline double deg_err_wrapped(double est, double truth) {
    return std::abs(rad2deg(wrap_phase(est - truth)));
}

inline double deg_err_plain(double est, double truth) {
    return std::abs(rad2deg(est - truth));
}

}  // namespace detail

// Estimation half of a trial, reusable when the synthesis is shared or
// modified (e.g. the phase-design comparison re-noises the same scene).
inline TrialResult estimate_from_synthesis(const SynthesisResult& synth,
                                           const SceneConfig& scene, const TrialOptions& opts,
                                           std::uint64_t tals_seed) {
    TrialResult out;
    const Eigen::Index k_count = scene.num_targets();
    out.sigma2 = synth.sigma2;
    try {
        FactorEstimate fe = tals(synth.tensor, k_count, opts.tals, tals_seed);
        out.fit = fe.fit;
        out.converged = fe.converged;

        EstimationDiagnostics diag;
        MatrixXcd cr_norm = normalize_receive_factor(fe.Cr_hat);
        std::vector<Angles> dods =
            estimate_dod(fe.Vt_hat, synth.G, scene.ris_phases, scene.geometry, &diag);
        CoarseDoa coarse = coarse_doa(cr_norm, &diag);
        RefinedDoa refined =
            refine_doa(cr_norm, coarse.directions, scene.geometry, &diag, opts.force_zero_cycles);
        std::vector<bool> degenerate;
        std::vector<Polarization> pols =
            estimate_polarization(cr_norm, refined.angles, scene.geometry, &degenerate);

        out.estimates.resize(static_cast<std::size_t>(k_count));
        for (Eigen::Index k = 0; k < k_count; ++k) {
            auto& e = out.estimates[static_cast<std::size_t>(k)];
            e.dod = dods[static_cast<std::size_t>(k)];
            e.doa_coarse = coarse.angles[static_cast<std::size_t>(k)];
            e.doa_refined = refined.angles[static_cast<std::size_t>(k)];
            e.pol = pols[static_cast<std::size_t>(k)];
            e.column_index = static_cast<int>(k);
            e.pol_degenerate = degenerate[static_cast<std::size_t>(k)];
        }
        out.permutation = match_to_truth(out.estimates, scene.targets);
        out.rounding_warnings = diag.rounding_warnings;
        out.arcsin_clamps = diag.arcsin_clamps;
        out.cr_norm = cr_norm;

        out.err.resize(6, k_count);
        out.err_coarse.resize(2, k_count);
        for (Eigen::Index i = 0; i < k_count; ++i) {
            const auto& e = out.estimates[static_cast<std::size_t>(i)];
            const int j = out.permutation[static_cast<std::size_t>(i)];
            const Target& t = scene.targets[static_cast<std::size_t>(j)];
            out.err(0, j) = detail::deg_err_wrapped(e.dod.azimuth, t.dod.azimuth);
            out.err(1, j) = detail::deg_err_wrapped(e.doa_refined.azimuth, t.doa.azimuth);
            out.err(2, j) = detail::deg_err_plain(e.dod.elevation, t.dod.elevation);
            out.err(3, j) = detail::deg_err_plain(e.doa_refined.elevation, t.doa.elevation);
            out.err(4, j) = detail::deg_err_plain(e.pol.aux, t.pol.aux);
            out.err(5, j) = detail::deg_err_wrapped(e.pol.phase, t.pol.phase);
            out.err_coarse(0, j) = detail::deg_err_wrapped(e.doa_coarse.azimuth, t.doa.azimuth);
            out.err_coarse(1, j) = detail::deg_err_plain(e.doa_coarse.elevation, t.doa.elevation);

            double best_cost = std::numeric_limits<double>::infinity();
            int nearest = -1;
            for (Eigen::Index c = 0; c < k_count; ++c) {
                double cost = detail::match_cost(e, scene.targets[static_cast<std::size_t>(c)]);
                if (cost < best_cost) {
                    best_cost = cost;
                    nearest = static_cast<int>(c);
                }
            }
            if (nearest != j) ++out.mis_associations;
        }

        if (opts.want_crb && out.sigma2 > 0.0) {
            MatrixXcd r_u = synth.U * synth.U.adjoint() / static_cast<double>(scene.snapshots);
            CrbResult crb = compute_crb(scene, out.sigma2, r_u);
            out.crb_singular = crb.singular;
            out.crb_deg = crb.per_parameter_bounds.cwiseMax(0.0).cwiseSqrt() * (180.0 / kPi);
        }
        out.ok = true;
    } catch (const std::exception& ex) {
        out.ok = false;
        out.error = ex.what();
    }
    return out;
}

inline TrialResult run_trial(const SceneConfig& scene, const TrialOptions& opts,
                             std::uint64_t seed) {
    SceneConfig sc = scene;
    sc.rng_seed = derive_seed(seed, 0);
    TrialResult out;
    try {
        SynthesisResult synth = synthesize(sc, opts.sigma2_override);
        out = estimate_from_synthesis(synth, sc, opts, derive_seed(seed, 1));
    } catch (const std::exception& ex) {
        out.ok = false;
        out.error = ex.what();
    }
    return out;
}

struct CellStats {
    int trials = 0;
    int failures = 0;
    Eigen::Matrix<double, 6, 1> sq_sum = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Vector2d coarse_sq_sum = Eigen::Vector2d::Zero();
    long pooled = 0;  // ok trials times targets
    Eigen::Matrix<double, 6, 1> crb_var_sum = Eigen::Matrix<double, 6, 1>::Zero();
    long crb_pooled = 0;
    int mis_associations = 0;
    double max_err = 0.0;  // worst single-parameter error across ok trials

    void absorb(const TrialResult& t) {
        ++trials;
        if (!t.ok) {
            ++failures;
            return;
        }
        const Eigen::Index k_count = t.err.cols();
        for (Eigen::Index k = 0; k < k_count; ++k) {
            for (int r = 0; r < 6; ++r) sq_sum(r) += t.err(r, k) * t.err(r, k);
            for (int r = 0; r < 2; ++r)
                coarse_sq_sum(r) += t.err_coarse(r, k) * t.err_coarse(r, k);
        }
        pooled += k_count;
        max_err = std::max(max_err, t.err.maxCoeff());
        mis_associations += t.mis_associations;
        if (t.crb_deg.size() > 0) {
            for (Eigen::Index k = 0; k < k_count; ++k)
                for (int r = 0; r < 6; ++r) crb_var_sum(r) += t.crb_deg(r, k) * t.crb_deg(r, k);
            crb_pooled += k_count;
        }
    }

    double rmse(int row) const {
        return pooled > 0 ? std::sqrt(sq_sum(row) / static_cast<double>(pooled))
                          : std::numeric_limits<double>::quiet_NaN();
    }
    double coarse_rmse(int row) const {
        return pooled > 0 ? std::sqrt(coarse_sq_sum(row) / static_cast<double>(pooled))
                          : std::numeric_limits<double>::quiet_NaN();
    }
    double crb(int row) const {
        return crb_pooled > 0 ? std::sqrt(crb_var_sum(row) / static_cast<double>(crb_pooled))
                              : std::numeric_limits<double>::quiet_NaN();
    }
};

namespace detail {

// Strided parallel map; per-index work must depend only on its derived seed.
template <typename Fn>
inline void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

inline std::vector<TrialResult> run_cell(const SceneConfig& scene, const TrialOptions& opts,
                                         int trials, std::uint64_t seed, int threads) {
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    detail::parallel_for(trials, threads, [&](int i) {
        results[static_cast<std::size_t>(i)] =
            run_trial(scene, opts, derive_seed(seed, static_cast<std::uint64_t>(i)));
    });
    return results;
}

inline CellStats aggregate(const std::vector<TrialResult>& results) {
    CellStats s;
    for (const auto& r : results) s.absorb(r);
    return s;
}

enum class ExperimentKind {
    snr_sweep,
    snapshot_sweep,
    target_sweep,
    max_targets_scatter,
    ris_comparison,
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::snr_sweep;
    SceneConfig scene;
    std::vector<double> sweep;  // SNRs in dB, snapshot counts, or target counts
    int trials = 500;
    int threads = 1;
    std::uint64_t seed = 1;
    TalsOptions tals;
    SdpOptions sdp;
    bool compute_crb = true;
};

struct ResultRow {
    double sweep_value = 0.0;
    std::string parameter;  // theta_t, phi_t, theta_r, phi_r, zeta, rho
    std::string variant;    // dod, doa_coarse, doa_refined, pol (+ /random, /optimized)
    double rmse_deg = 0.0;
    double crb_deg = std::numeric_limits<double>::quiet_NaN();
    int trials = 0;
    int failures = 0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
};

namespace detail {

inline void emit_cell_rows(std::vector<ResultRow>& rows, double sweep_value, const CellStats& s,
                           const std::string& suffix = "") {
    struct Item {
        int row;
        const char* variant;
        bool coarse;
    };
    static const Item items[] = {
        {0, "dod", false},         {2, "dod", false},
        {1, "doa_coarse", true},   {3, "doa_coarse", true},
        {1, "doa_refined", false}, {3, "doa_refined", false},
        {4, "pol", false},         {5, "pol", false},
    };
    for (const Item& it : items) {
        ResultRow r;
        r.sweep_value = sweep_value;
        r.parameter = parameter_name(it.row);
        r.variant = std::string(it.variant) + suffix;
        // Coarse rows use row indices 1/3 of the refined table; map to 0/1.
        r.rmse_deg = it.coarse ? s.coarse_rmse(it.row == 1 ? 0 : 1) : s.rmse(it.row);
        r.crb_deg = s.crb(it.row);
        r.trials = s.trials;
        r.failures = s.failures;
        rows.push_back(std::move(r));
    }
}

}  // namespace detail

// One phase-design comparison trial: estimate under random phases, design
// optimized phases from those estimates, then re-estimate the same scene
// (same reflection coefficients and noise stream, same noise power) under
// the optimized phases.
struct ComparisonTrial {
    TrialResult random_arm;
    TrialResult optimized_arm;
    double objective_random = 0.0;
    double objective_optimized = 0.0;
};

inline ComparisonTrial run_comparison_trial(const SceneConfig& scene, const TrialOptions& opts,
                                            const SdpOptions& sdp, std::uint64_t seed) {
    ComparisonTrial out;
    const Eigen::Index q_count = scene.geometry.num_ris();

    Rng wr(derive_seed(seed, 10));
    SceneConfig sc_rand = scene;
    sc_rand.ris_phases = wr.unit_modulus_vector(q_count);
    sc_rand.rng_seed = derive_seed(seed, 11);

    TrialResult rand_arm;
    SynthesisResult synth;
    try {
        synth = synthesize(sc_rand);
        rand_arm = estimate_from_synthesis(synth, sc_rand, opts, derive_seed(seed, 12));
    } catch (const std::exception& ex) {
        rand_arm.ok = false;
        rand_arm.error = ex.what();
    }
    out.random_arm = rand_arm;

    SceneConfig sc_opt = sc_rand;
    if (rand_arm.ok) {
        try {
            std::vector<Angles> dods;
            for (const auto& e : rand_arm.estimates) dods.push_back(e.dod);
            MatrixXcd at_model = transmit_steering(scene.geometry, dods).matrix;
            MatrixXcd vt_model = synth.G * sc_rand.ris_phases.asDiagonal() * at_model;
            // Rescale the snapshot factor so it pairs with the physically
            // normalized receive factor instead of the PARAFAC column scales.
            MatrixXcd kr = khatri_rao(vt_model, rand_arm.cr_norm);
            MatrixXcd z3 = unfold(synth.tensor.data, 3);
            MatrixXcd u_model = kr.completeOrthogonalDecomposition().solve(z3);  // K x L
            SdpSolution sol = optimize_phases(at_model, rand_arm.cr_norm, u_model.transpose(),
                                              synth.G, sc_rand.ris_phases, derive_seed(seed, 13),
                                              sdp);
            sc_opt.ris_phases = sol.w_extracted;
            QuadraticForm form = build_phi_from_factors(u_model, rand_arm.cr_norm, synth.G,
                                                        at_model);
            out.objective_random = quadratic_objective(form, sc_rand.ris_phases);
            out.objective_optimized = quadratic_objective(form, sol.w_extracted);
        } catch (const std::exception&) {
            // Fall back to the random phases; the arm still runs.
        }
    }

    TrialOptions opt_opts = opts;
    opt_opts.sigma2_override = rand_arm.sigma2;  // same noise floor in both arms
    try {
        SynthesisResult synth_opt = synthesize(sc_opt, opt_opts.sigma2_override);
        out.optimized_arm =
            estimate_from_synthesis(synth_opt, sc_opt, opt_opts, derive_seed(seed, 12));
    } catch (const std::exception& ex) {
        out.optimized_arm.ok = false;
        out.optimized_arm.error = ex.what();
    }
    return out;
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult out;
    TrialOptions opts;
    opts.tals = spec.tals;
    opts.want_crb = spec.compute_crb;

    switch (spec.kind) {
        case ExperimentKind::snr_sweep: {
            for (double v : spec.sweep) {
                SceneConfig sc = spec.scene;
                sc.snr_db = v;
                CellStats s = aggregate(run_cell(sc, opts, spec.trials, spec.seed, spec.threads));
                detail::emit_cell_rows(out.rows, v, s);
            }
            break;
        }
        case ExperimentKind::snapshot_sweep: {
            for (double v : spec.sweep) {
                SceneConfig sc = spec.scene;
                sc.snapshots = static_cast<int>(v);
                CellStats s = aggregate(run_cell(sc, opts, spec.trials, spec.seed, spec.threads));
                detail::emit_cell_rows(out.rows, v, s);
            }
            break;
        }
        case ExperimentKind::target_sweep: {
            for (double v : spec.sweep) {
                SceneConfig sc = spec.scene;
                sc.targets = scenario::sweep_targets(static_cast<int>(v));
                CellStats s = aggregate(run_cell(sc, opts, spec.trials, spec.seed, spec.threads));
                detail::emit_cell_rows(out.rows, v, s);
            }
            break;
        }
        case ExperimentKind::max_targets_scatter: {
            double k_val = static_cast<double>(spec.scene.num_targets());
            CellStats s =
                aggregate(run_cell(spec.scene, opts, spec.trials, spec.seed, spec.threads));
            detail::emit_cell_rows(out.rows, k_val, s);
            ResultRow mx{k_val, "max_error", "all", s.max_err,
                         std::numeric_limits<double>::quiet_NaN(), s.trials, s.failures};
            out.rows.push_back(mx);
            ResultRow mis{k_val, "mis_associations", "all",
                          static_cast<double>(s.mis_associations),
                          std::numeric_limits<double>::quiet_NaN(), s.trials, s.failures};
            out.rows.push_back(mis);
            break;
        }
        case ExperimentKind::ris_comparison: {
            for (double v : spec.sweep) {
                SceneConfig sc = spec.scene;
                sc.snr_db = v;
                std::vector<ComparisonTrial> trials(static_cast<std::size_t>(spec.trials));
                detail::parallel_for(spec.trials, spec.threads, [&](int i) {
                    trials[static_cast<std::size_t>(i)] = run_comparison_trial(
                        sc, opts, spec.sdp,
                        derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
                });
                CellStats rand_stats, opt_stats;
                for (const auto& t : trials) {
                    rand_stats.absorb(t.random_arm);
                    opt_stats.absorb(t.optimized_arm);
                }
                detail::emit_cell_rows(out.rows, v, rand_stats, "/random");
                detail::emit_cell_rows(out.rows, v, opt_stats, "/optimized");
            }
            break;
        }
    }
    return out;
}

inline void write_csv(std::ostream& os, const ExperimentResult& result) {
    os << "sweep_value,parameter,variant,rmse_deg,crb_deg,trials,failures\n";
    os.precision(12);
    for (const auto& r : result.rows)
        os << r.sweep_value << ',' << r.parameter << ',' << r.variant << ',' << r.rmse_deg << ','
           << r.crb_deg << ',' << r.trials << ',' << r.failures << '\n';
}

inline const char* experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::snr_sweep: return "snr-sweep";
        case ExperimentKind::snapshot_sweep: return "snapshot-sweep";
        case ExperimentKind::target_sweep: return "target-sweep";
        case ExperimentKind::max_targets_scatter: return "max-targets";
        case ExperimentKind::ris_comparison: return "ris-compare";
    }
    return "unknown";
}

// CSV plus a JSON sidecar (<out>.json) echoing the configuration.
inline void emit_results(const ExperimentSpec& spec, const ExperimentResult& result,
                         const std::string& out_path) {
    std::ofstream csv(out_path);
    if (!csv) throw ConfigError("cannot open output file: " + out_path);
    write_csv(csv, result);

    nlohmann::json j;
    j["experiment"] = experiment_kind_name(spec.kind);
    j["trials"] = spec.trials;
    j["seed"] = spec.seed;
    j["threads"] = spec.threads;
    j["sweep"] = spec.sweep;
    j["scene"] = {
        {"wavelength", spec.scene.geometry.wavelength},
        {"transmit_elements", spec.scene.geometry.num_transmit()},
        {"receive_elements", spec.scene.geometry.num_receive()},
        {"ris_elements", spec.scene.geometry.num_ris()},
        {"targets", spec.scene.num_targets()},
        {"snapshots", spec.scene.snapshots},
        {"snr_db", std::isfinite(spec.scene.snr_db) ? nlohmann::json(spec.scene.snr_db)
                                                    : nlohmann::json("inf")},
    };
    std::ofstream js(out_path + ".json");
    if (!js) throw ConfigError("cannot open output file: " + out_path + ".json");
    js << j.dump(2) << '\n';
}

}  // namespace risloc

#endif
