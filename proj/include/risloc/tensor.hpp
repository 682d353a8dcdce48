// Third-order complex tensor with the three PARAFAC unfoldings and the
// Khatri-Rao (column-wise Kronecker) product. Row ordering convention for
// A (I x K) kr B (J x K): row index = i*J + j, i.e. the left factor varies
// slowest. All unfoldings below are consistent with this convention:
//   mode 1: (d1*d2) x d0, row = j*d2 + k
//   mode 2: (d2*d0) x d1, row = k*d0 + i
//   mode 3: (d0*d1) x d2, row = i*d1 + j
#ifndef RISLOC_TENSOR_HPP
#define RISLOC_TENSOR_HPP

#include "risloc/types.hpp"

namespace risloc {

class Tensor3 {
  public:
    Tensor3() = default;
    Tensor3(Eigen::Index d0, Eigen::Index d1, Eigen::Index d2)
        : d0_(d0), d1_(d1), d2_(d2), data_(VectorXcd::Zero(d0 * d1 * d2)) {}

    Eigen::Index dim(int n) const { return n == 0 ? d0_ : (n == 1 ? d1_ : d2_); }
    Eigen::Index size() const { return data_.size(); }

    cplx& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
        return data_[i + d0_ * (j + d1_ * k)];
    }
    cplx operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
        return data_[i + d0_ * (j + d1_ * k)];
    }

    VectorXcd& raw() { return data_; }
    const VectorXcd& raw() const { return data_; }

    double norm() const { return data_.norm(); }

  private:
    Eigen::Index d0_ = 0, d1_ = 0, d2_ = 0;
    VectorXcd data_;
};

inline MatrixXcd khatri_rao(const MatrixXcd& a, const MatrixXcd& b) {
    if (a.cols() != b.cols()) throw ConfigError("khatri_rao: column count mismatch");
    MatrixXcd out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index k = 0; k < a.cols(); ++k)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.col(k).segment(i * b.rows(), b.rows()) = a(i, k) * b.col(k);
    return out;
}

inline MatrixXcd unfold(const Tensor3& t, int mode) {
    const Eigen::Index d0 = t.dim(0), d1 = t.dim(1), d2 = t.dim(2);
    MatrixXcd z;
    switch (mode) {
        case 1:
            z.resize(d1 * d2, d0);
            for (Eigen::Index i = 0; i < d0; ++i)
                for (Eigen::Index j = 0; j < d1; ++j)
                    for (Eigen::Index k = 0; k < d2; ++k) z(j * d2 + k, i) = t(i, j, k);
            break;
        case 2:
            z.resize(d2 * d0, d1);
            for (Eigen::Index i = 0; i < d0; ++i)
                for (Eigen::Index j = 0; j < d1; ++j)
                    for (Eigen::Index k = 0; k < d2; ++k) z(k * d0 + i, j) = t(i, j, k);
            break;
        case 3:
            z.resize(d0 * d1, d2);
            for (Eigen::Index i = 0; i < d0; ++i)
                for (Eigen::Index j = 0; j < d1; ++j)
                    for (Eigen::Index k = 0; k < d2; ++k) z(i * d1 + j, k) = t(i, j, k);
            break;
        default:
            throw ConfigError("unfold: mode must be 1, 2 or 3");
    }
    return z;
}

inline Tensor3 fold(const MatrixXcd& z, int mode, Eigen::Index d0, Eigen::Index d1, Eigen::Index d2) {
    Tensor3 t(d0, d1, d2);
    switch (mode) {
        case 1:
            for (Eigen::Index i = 0; i < d0; ++i)
                for (Eigen::Index j = 0; j < d1; ++j)
                    for (Eigen::Index k = 0; k < d2; ++k) t(i, j, k) = z(j * d2 + k, i);
            break;
        case 2:
            for (Eigen::Index i = 0; i < d0; ++i)
                for (Eigen::Index j = 0; j < d1; ++j)
                    for (Eigen::Index k = 0; k < d2; ++k) t(i, j, k) = z(k * d0 + i, j);
            break;
        case 3:
            for (Eigen::Index i = 0; i < d0; ++i)
                for (Eigen::Index j = 0; j < d1; ++j)
                    for (Eigen::Index k = 0; k < d2; ++k) t(i, j, k) = z(i * d1 + j, k);
            break;
        default:
            throw ConfigError("fold: mode must be 1, 2 or 3");
    }
    return t;
}

}  // namespace risloc

#endif
