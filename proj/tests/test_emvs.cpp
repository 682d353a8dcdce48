#include <catch2/catch_amalgamated.hpp>

#include "risloc/emvs.hpp"
#include "risloc/rng.hpp"
#include "risloc/steering.hpp"

using namespace risloc;

TEST_CASE("direction matrix entries match hand-evaluated trig", "[emvs]") {
    // Azimuth 45 deg, elevation 25 deg, every entry recomputed independently.
    const double az = deg2rad(45.0), el = deg2rad(25.0);
    Matrix62cd v = emvs_direction_matrix({az, el});

    const double c45 = std::sqrt(0.5);
    const double c25 = std::cos(deg2rad(25.0)), s25 = std::sin(deg2rad(25.0));
    CHECK(std::abs(v(0, 0) - cplx(c45 * c25, 0)) < 1e-15);
    CHECK(std::abs(v(1, 0) - cplx(c45 * c25, 0)) < 1e-15);
    CHECK(std::abs(v(2, 0) - cplx(-s25, 0)) < 1e-15);
    CHECK(std::abs(v(3, 0) - cplx(-c45, 0)) < 1e-15);
    CHECK(std::abs(v(4, 0) - cplx(c45, 0)) < 1e-15);
    CHECK(std::abs(v(5, 0)) < 1e-15);
    CHECK(std::abs(v(0, 1) - cplx(-c45, 0)) < 1e-15);
    CHECK(std::abs(v(1, 1) - cplx(c45, 0)) < 1e-15);
    CHECK(std::abs(v(2, 1)) < 1e-15);
    CHECK(std::abs(v(3, 1) - cplx(-c45 * c25, 0)) < 1e-15);
    CHECK(std::abs(v(4, 1) - cplx(-c45 * c25, 0)) < 1e-15);
    CHECK(std::abs(v(5, 1) - cplx(s25, 0)) < 1e-15);
}

TEST_CASE("direction matrix columns are orthogonal with norm sqrt(2)", "[emvs]") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        Angles a{(2.0 * rng.uniform() - 1.0) * kPi, rng.uniform() * kPi};
        Matrix62cd v = emvs_direction_matrix(a);
        Eigen::Matrix2cd g = v.adjoint() * v;
        CHECK(std::abs(g(0, 0) - 2.0) < 1e-12);
        CHECK(std::abs(g(1, 1) - 2.0) < 1e-12);
        CHECK(std::abs(g(0, 1)) < 1e-12);
    }
}

TEST_CASE("response norm is sqrt(2) for any unit polarization", "[emvs]") {
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        Angles a{(2.0 * rng.uniform() - 1.0) * kPi, rng.uniform() * kPi};
        Polarization p{rng.uniform() * kPi / 2.0, (2.0 * rng.uniform() - 1.0) * kPi};
        Vector6cd b = emvs_response(a, p);
        CHECK(std::abs(b.squaredNorm() - 2.0) < 1e-12);
        // Sixth component is sin(elevation)*cos(aux): real and nonnegative.
        CHECK(std::abs(b(5).imag()) < 1e-15);
        CHECK(b(5).real() >= -1e-15);
    }
}

TEST_CASE("cross product of field blocks recovers the propagation direction", "[emvs]") {
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        // Keep angles away from the degenerate elevation poles.
        Angles a{(2.0 * rng.uniform() - 1.0) * 0.95 * kPi,
                 deg2rad(5.0) + rng.uniform() * deg2rad(170.0)};
        Polarization p{0.05 + rng.uniform() * (kPi / 2.0 - 0.1),
                       (2.0 * rng.uniform() - 1.0) * kPi};
        Vector6cd b = emvs_response(a, p);
        Vector3d q = poynting_vector(b);
        Vector3d expected = unit_direction(a);
        CHECK((q - expected).norm() < 1e-10);
    }
}

TEST_CASE("cross product is invariant to a complex column scale", "[emvs]") {
    Vector6cd b = emvs_response({deg2rad(50.0), deg2rad(21.0)}, {deg2rad(30.0), deg2rad(20.0)});
    Vector3d q0 = poynting_vector(b);
    // The magnitude rescales with the column but the direction is invariant.
    Vector3d q1 = poynting_vector(std::polar(3.7, 1.2) * b);
    CHECK((q0.normalized() - q1.normalized()).norm() < 1e-12);
}

TEST_CASE("vanishing field block is rejected", "[emvs]") {
    Vector6cd b = Vector6cd::Zero();
    b(0) = 1.0;  // magnetic block zero
    CHECK_THROWS_AS(poynting_vector(b), DegenerateField);
}
