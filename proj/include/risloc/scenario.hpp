// Built-in scene generators. Geometries follow the conventions the
// estimation chain relies on: the first receive element sits at the origin,
// and the RIS aperture is kept within half-wavelength projections of its
// reference element so the transmit-side phase never wraps.
#ifndef RISLOC_SCENARIO_HPP
#define RISLOC_SCENARIO_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "risloc/rng.hpp"
#include "risloc/types.hpp"

namespace risloc {

namespace scenario {

// Rejection-sampled positions with a minimum (and optional maximum) pairwise
// spacing. The first element is pinned to `anchor`.
inline MatrixXd random_positions(Eigen::Index count, const Vector3d& anchor, double box_side,
                                 double min_spacing, double max_spacing, Rng& rng) {
    MatrixXd p(count, 3);
    p.row(0) = anchor;
    for (Eigen::Index i = 1; i < count; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 200000 && !placed; ++attempt) {
            Vector3d cand = anchor + Vector3d(box_side * (rng.uniform() - 0.5),
                                              box_side * (rng.uniform() - 0.5),
                                              box_side * (rng.uniform() - 0.5));
            placed = true;
            for (Eigen::Index j = 0; j < i; ++j) {
                double d = (cand.transpose() - p.row(j)).norm();
                if (d < min_spacing || (max_spacing > 0.0 && d > max_spacing)) {
                    placed = false;
                    break;
                }
            }
            if (placed) p.row(i) = cand;
        }
        if (!placed) throw ConfigError("random_positions: spacing constraints unsatisfiable");
    }
    return p;
}

// Five-element cross in the x-y plane. Offsets from the reference are a
// single spacing along one axis, so |offset . direction| < spacing for any
// unit direction.
inline MatrixXd cross_ris(const Vector3d& center, double spacing) {
    MatrixXd p(5, 3);
    p.row(0) = center;
    p.row(1) = center + Vector3d(spacing, 0, 0);
    p.row(2) = center + Vector3d(0, spacing, 0);
    p.row(3) = center - Vector3d(spacing, 0, 0);
    p.row(4) = center - Vector3d(0, spacing, 0);
    return p;
}

// rows x cols planar grid; element 0 is the grid point closest to the center
// so relative offsets (and with them transmit-side phases) stay small.
inline MatrixXd grid_ris(const Vector3d& center, int rows, int cols, double spacing) {
    const int q = rows * cols;
    MatrixXd p(q, 3);
    std::vector<Vector3d> pts;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            pts.push_back(center + Vector3d((c - (cols - 1) / 2.0) * spacing,
                                            (r - (rows - 1) / 2.0) * spacing, 0.0));
    std::sort(pts.begin(), pts.end(), [&](const Vector3d& a, const Vector3d& b) {
        return (a - center).norm() < (b - center).norm();
    });
    for (int i = 0; i < q; ++i) p.row(i) = pts[static_cast<std::size_t>(i)];
    return p;
}

inline Target make_target(double theta_t_deg, double phi_t_deg, double theta_r_deg,
                          double phi_r_deg, double zeta_deg, double rho_deg) {
    Target t;
    t.dod = {deg2rad(theta_t_deg), deg2rad(phi_t_deg)};
    t.doa = {deg2rad(theta_r_deg), deg2rad(phi_r_deg)};
    t.pol = {deg2rad(zeta_deg), deg2rad(rho_deg)};
    return t;
}

inline std::vector<Target> baseline_targets() {
    return {make_target(45, 25, 50, 21, 30, 20),
            make_target(56, 26, 71, 20, 60, 50),
            make_target(71, 48, 80, 68, 42, 68)};
}

// Evenly spread targets for the K sweeps.
inline std::vector<Target> sweep_targets(int k) {
    std::vector<Target> out;
    for (int i = 0; i < k; ++i)
        out.push_back(make_target(45.0 + 3.0 * i, 25.0 + 2.0 * i, 20.0 + 5.0 * i, 32.0 + 2.0 * i,
                                  20.0 + 4.0 * i, 10.0 + 5.0 * i));
    return out;
}

// Baseline configuration: M=5, Q=5, N=12, lambda=0.1 m. Receive elements are
// drawn with minimum pairwise spacing 0.8*lambda (beyond lambda/2), first
// element at the origin.
inline SceneConfig baseline_scene(int snapshots = 500, double snr_db = 10.0,
                                  std::uint64_t seed = 1) {
    const double lambda = 0.1;
    SceneConfig s;
    s.geometry.wavelength = lambda;
    Rng geo_rng(0xB07D1CEDBAD5EEDULL);  // geometry is part of the scene definition, not the trial
    s.geometry.transmit = random_positions(5, {0.0, 0.0, 30.0 * lambda}, 4.0 * lambda,
                                           0.8 * lambda, 0.0, geo_rng);
    s.geometry.receive =
        random_positions(12, {0.0, 0.0, 0.0}, 4.5 * lambda, 0.8 * lambda, 0.0, geo_rng);
    s.geometry.ris = cross_ris({0.0, 0.0, 10.0 * lambda}, 0.5 * lambda);
    s.targets = baseline_targets();
    // Random unit-modulus reflection phases (fixed with the geometry). A flat
    // profile would let the physical transmit->RIS phase structure collapse
    // V_t toward rank one, which cripples the factor separation.
    s.ris_phases.resize(5);
    for (Eigen::Index q = 0; q < 5; ++q)
        s.ris_phases[q] = std::polar(1.0, 2.0 * kPi * geo_rng.uniform());
    s.snapshots = snapshots;
    s.snr_db = snr_db;
    s.rng_seed = seed;
    return s;
}

// All receive pairwise spacings land in [0.8*lambda, 3*lambda]; phase wraps
// are guaranteed to occur for the baseline targets.
inline SceneConfig beyond_halfwave_scene(int snapshots = 500, double snr_db = 10.0,
                                         std::uint64_t seed = 1) {
    SceneConfig s = baseline_scene(snapshots, snr_db, seed);
    const double lambda = s.geometry.wavelength;
    Rng geo_rng(0xC0FFEE12345ULL);
    s.geometry.receive =
        random_positions(8, {0.0, 0.0, 0.0}, 2.4 * lambda, 0.8 * lambda, 3.0 * lambda, geo_rng);
    s.targets = baseline_targets();
    return s;
}

// Compact receive array: every pairwise spacing at most lambda/2, so no
// disambiguation is ever needed.
inline SceneConfig subhalfwave_scene(int snapshots = 500, double snr_db = 10.0,
                                     std::uint64_t seed = 1) {
    SceneConfig s = baseline_scene(snapshots, snr_db, seed);
    const double lambda = s.geometry.wavelength;
    Rng geo_rng(0x5EA5CAFE77ULL);
    s.geometry.receive =
        random_positions(6, {0.0, 0.0, 0.0}, 0.45 * lambda, 0.18 * lambda, 0.5 * lambda, geo_rng);
    s.targets = baseline_targets();
    return s;
}

// Larger configuration for RIS phase design comparisons: M=50, Q=18, N=11.
// The transmit array sits in the far field of the RIS so the channel has the
// coherent structure phase optimization can exploit. Target elevations on
// the transmit side stay moderate to keep DOD phases unwrapped across the
// 6x3 RIS grid.
inline SceneConfig ris_compare_scene(int snapshots = 100, double snr_db = 10.0,
                                     std::uint64_t seed = 1) {
    const double lambda = 0.1;
    SceneConfig s;
    s.geometry.wavelength = lambda;
    Rng geo_rng(0xA11CE5EEDFACEULL);
    s.geometry.transmit = random_positions(50, {0.0, 0.0, 90.0 * lambda}, 10.0 * lambda,
                                           0.4 * lambda, 0.0, geo_rng);
    s.geometry.receive =
        random_positions(11, {0.0, 0.0, 0.0}, 4.0 * lambda, 0.8 * lambda, 0.0, geo_rng);
    s.geometry.ris = grid_ris({0.0, 0.0, 10.0 * lambda}, 3, 6, 0.5 * lambda);
    s.targets = {make_target(40, 10, 50, 21, 30, 20), make_target(120, 15, 71, 20, 60, 50),
                 make_target(-70, 20, 80, 68, 42, 68)};
    s.ris_phases = VectorXcd::Ones(18);
    s.snapshots = snapshots;
    s.snr_db = snr_db;
    s.rng_seed = seed;
    return s;
}

// Identifiability-limit configuration: K = N = 12 targets.
inline SceneConfig max_targets_scene(int snapshots = 1000, double snr_db = 50.0,
                                     std::uint64_t seed = 1) {
    SceneConfig s = baseline_scene(snapshots, snr_db, seed);
    s.targets = sweep_targets(12);
    return s;
}

inline SceneConfig builtin_scene(const std::string& name) {
    if (name == "baseline" || name == "table1") return baseline_scene();
    if (name == "beyond") return beyond_halfwave_scene();
    if (name == "subhalf") return subhalfwave_scene();
    if (name == "ris-compare") return ris_compare_scene();
    if (name == "max-targets") return max_targets_scene();
    throw ConfigError("unknown builtin scene: " + name);
}

}  // namespace scenario

}  // namespace risloc

#endif
