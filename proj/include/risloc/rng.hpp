#ifndef RISLOC_RNG_HPP
#define RISLOC_RNG_HPP

#include <cstdint>
#include <random>

#include "risloc/types.hpp"

namespace risloc {

// Seed mixing for derived streams. Parallel trials each get their own
// generator so scheduling never changes results.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x51ed2701a3c5e0f7ULL));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }

    // Circular complex Gaussian, unit variance per complex sample.
    cplx cgauss() {
        const double s = std::sqrt(0.5);
        return {s * normal(), s * normal()};
    }

    MatrixXcd cgauss_matrix(Eigen::Index rows, Eigen::Index cols) {
        MatrixXcd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cgauss();
        return m;
    }

    VectorXcd unit_modulus_vector(Eigen::Index n) {
        VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double phi = 2.0 * kPi * uniform();
            v[i] = std::polar(1.0, phi);
        }
        return v;
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace risloc

#endif
