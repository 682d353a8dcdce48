// risloc: RIS-aided bistatic EMVS-MIMO radar simulation and estimation toolkit.
#ifndef RISLOC_TYPES_HPP
#define RISLOC_TYPES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace risloc {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Wrap into (-pi, pi].
inline double wrap_phase(double x) {
    x = std::fmod(x + kPi, 2.0 * kPi);
    if (x <= 0.0) x += 2.0 * kPi;
    return x - kPi;
}

struct DegenerateField : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegeneratePolarization : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IdentifiabilityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RankDeficiency : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IllConditioned : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Azimuth in (-pi, pi], elevation in [0, pi]. Radians everywhere inside the
// library; degrees appear only in config files and reports.
struct Angles {
    double azimuth = 0.0;
    double elevation = 0.0;
};

// Auxiliary angle in [0, pi/2], phase difference in (-pi, pi].
struct Polarization {
    double aux = 0.0;
    double phase = 0.0;
};

struct Target {
    Angles dod;
    Angles doa;
    Polarization pol;
};

struct ArrayGeometry {
    MatrixXd transmit;  // M x 3, meters
    MatrixXd receive;   // N x 3, meters
    MatrixXd ris;       // Q x 3, meters
    double wavelength = 0.1;

    Eigen::Index num_transmit() const { return transmit.rows(); }
    Eigen::Index num_receive() const { return receive.rows(); }
    Eigen::Index num_ris() const { return ris.rows(); }

    void validate() const {
        if (wavelength <= 0.0) throw ConfigError("wavelength must be positive");
        if (transmit.rows() < 1 || receive.rows() < 1 || ris.rows() < 1)
            throw ConfigError("each array needs at least one element");
        auto check_distinct = [](const MatrixXd& p, const char* name) {
            for (Eigen::Index i = 0; i < p.rows(); ++i)
                for (Eigen::Index j = i + 1; j < p.rows(); ++j)
                    if ((p.row(i) - p.row(j)).norm() < 1e-12)
                        throw ConfigError(std::string("coincident elements in ") + name);
        };
        check_distinct(transmit, "transmit array");
        check_distinct(receive, "receive array");
        check_distinct(ris, "ris array");
    }
};

struct SceneConfig {
    ArrayGeometry geometry;
    std::vector<Target> targets;
    VectorXcd ris_phases;        // length Q, unit modulus
    int snapshots = 500;
    double snr_db = 10.0;        // +inf disables noise
    std::uint64_t rng_seed = 1;

    Eigen::Index num_targets() const { return static_cast<Eigen::Index>(targets.size()); }

    void validate() const {
        geometry.validate();
        if (targets.empty()) throw ConfigError("scene has no targets");
        if (num_targets() > geometry.num_receive())
            throw IdentifiabilityViolation("K exceeds the number of receive elements");
        if (ris_phases.size() != geometry.num_ris())
            throw ConfigError("ris_phases length does not match RIS element count");
        for (Eigen::Index q = 0; q < ris_phases.size(); ++q)
            if (std::abs(std::abs(ris_phases[q]) - 1.0) > 1e-9)
                throw ConfigError("ris_phases must be unit modulus");
        if (snapshots < 1) throw ConfigError("snapshots must be positive");
    }
};

}  // namespace risloc

#endif
