// Electromagnetic vector sensor response model: six co-located components
// (three electric dipoles, three magnetic loops) per spatial point.
#ifndef RISLOC_EMVS_HPP
#define RISLOC_EMVS_HPP

#include "risloc/types.hpp"

namespace risloc {

using Matrix62cd = Eigen::Matrix<cplx, 6, 2>;
using Vector6cd = Eigen::Matrix<cplx, 6, 1>;
using Eigen::Vector2cd;

// Direction-dependent factor of the EMVS response. Entries are real trig
// terms of azimuth/elevation, embedded in the complex type.
inline Matrix62cd emvs_direction_matrix(const Angles& a) {
    const double ct = std::cos(a.azimuth), st = std::sin(a.azimuth);
    const double cp = std::cos(a.elevation), sp = std::sin(a.elevation);
    Matrix62cd v;
    v << ct * cp, -st,
         st * cp, ct,
         -sp,     0.0,
         -st,     -ct * cp,
         ct,      -st * cp,
         0.0,     sp;
    return v;
}

inline Vector2cd polarization_vector(const Polarization& p) {
    Vector2cd g;
    g << std::sin(p.aux) * std::polar(1.0, p.phase), std::cos(p.aux);
    return g;
}

inline Vector6cd emvs_response(const Angles& a, const Polarization& p) {
    return emvs_direction_matrix(a) * polarization_vector(p);
}

// Propagation direction from the field components: normalized cross product
// of the electric part with the conjugated magnetic part. For an exact TEM
// response this equals [cos(az)sin(el), sin(az)sin(el), cos(el)].
inline Vector3d poynting_vector(const Vector6cd& b) {
    Eigen::Vector3cd e = b.head<3>();
    Eigen::Vector3cd m = b.tail<3>();
    const double en = e.norm(), mn = m.norm();
    if (en < 1e-12 || mn < 1e-12)
        throw DegenerateField("electric or magnetic field component vanishes");
    Eigen::Vector3cd q = (e / (en * en)).cross(m.conjugate() / (mn * mn));
    return q.real();
}

}  // namespace risloc

#endif
