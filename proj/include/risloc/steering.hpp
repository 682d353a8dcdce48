// Steering matrices and the transmitter-to-RIS channel for arbitrary
// element placements. Steering entries follow the e^{-j*2*pi*path/lambda}
// convention throughout.
#ifndef RISLOC_STEERING_HPP
#define RISLOC_STEERING_HPP

#include <vector>

#include "risloc/types.hpp"

namespace risloc {

// Unit propagation direction for an (azimuth, elevation) pair.
inline Vector3d unit_direction(const Angles& a) {
    return {std::cos(a.azimuth) * std::sin(a.elevation),
            std::sin(a.azimuth) * std::sin(a.elevation),
            std::cos(a.elevation)};
}

inline MatrixXd direction_matrix(const std::vector<Angles>& angles) {
    MatrixXd q(3, static_cast<Eigen::Index>(angles.size()));
    for (std::size_t k = 0; k < angles.size(); ++k) q.col(static_cast<Eigen::Index>(k)) = unit_direction(angles[k]);
    return q;
}

// M x Q channel from each transmit element to each RIS element, phase set by
// the Euclidean path length.
inline MatrixXcd ris_channel(const ArrayGeometry& geom) {
    const Eigen::Index m_count = geom.num_transmit(), q_count = geom.num_ris();
    MatrixXcd g(m_count, q_count);
    for (Eigen::Index m = 0; m < m_count; ++m)
        for (Eigen::Index q = 0; q < q_count; ++q) {
            double rho = (geom.ris.row(q) - geom.transmit.row(m)).norm();
            g(m, q) = std::polar(1.0, -2.0 * kPi * rho / geom.wavelength);
        }
    return g;
}

struct Steering {
    MatrixXcd matrix;    // complex steering matrix
    MatrixXd path_diff;  // path-length matrix, meters
};

// RIS-side steering: path differences are taken relative to the first RIS
// element, so the first row of the steering matrix is all ones.
inline Steering transmit_steering(const ArrayGeometry& geom, const std::vector<Angles>& dods) {
    MatrixXd rel = geom.ris.rowwise() - geom.ris.row(0);
    Steering s;
    s.path_diff = rel * direction_matrix(dods);
    s.matrix = (cplx(0.0, -2.0 * kPi / geom.wavelength) * s.path_diff).array().exp();
    return s;
}

// Receive-side steering uses absolute positions; anchoring the first receive
// element at the origin keeps the reference phase at zero.
inline Steering receive_steering(const ArrayGeometry& geom, const std::vector<Angles>& doas) {
    Steering s;
    s.path_diff = geom.receive * direction_matrix(doas);
    s.matrix = (cplx(0.0, -2.0 * kPi / geom.wavelength) * s.path_diff).array().exp();
    return s;
}

}  // namespace risloc

#endif
