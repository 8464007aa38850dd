// fas-keygen: fluid-antenna-assisted physical-layer secret key generation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef FAS_KEYGEN_NUMERICS_HPP
#define FAS_KEYGEN_NUMERICS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace faskeygen {

// Thrown when an iterative kernel fails to reach its tolerance.
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string &msg) : std::runtime_error(msg) {}
};

// Dense symmetric matrix, full row-major storage. set() mirrors the entry so
// that at(i,j) == at(j,i) is bit-exact.
class SymmetricMatrix {
  public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(int order);

    static SymmetricMatrix identity(int order);

    int order() const { return n_; }
    double at(int i, int j) const { return a_[(std::size_t)i * n_ + j]; }
    void set(int i, int j, double v) {
        a_[(std::size_t)i * n_ + j] = v;
        a_[(std::size_t)j * n_ + i] = v;
    }
    const std::vector<double> &data() const { return a_; }

    double max_abs() const;

    // Principal submatrix on the given (0-based, strictly increasing) indices.
    SymmetricMatrix submatrix(const std::vector<int> &idx) const;

  private:
    int n_ = 0;
    std::vector<double> a_;
};

// Plain dense real matrix (row-major), used for eigenvector sets and
// square-root factors.
struct RealMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> m;

    RealMatrix() = default;
    RealMatrix(int r, int c) : rows(r), cols(c), m((std::size_t)r * c, 0.0) {}
    double at(int i, int j) const { return m[(std::size_t)i * cols + j]; }
    double &at(int i, int j) { return m[(std::size_t)i * cols + j]; }
};

// Full spectrum of a symmetric matrix. values are sorted descending and
// column k of vectors holds the eigenvector of values[k]. Every eigenvector
// is normalized with its first component of magnitude > 1e-12 made positive,
// so repeated runs produce identical output.
struct EigenDecomposition {
    std::vector<double> values;
    RealMatrix vectors;

    int order() const { return (int)values.size(); }
    double vector_at(int component, int k) const { return vectors.at(component, k); }
};

// Bessel function of the first kind, order zero. Power series up to |x| = 12,
// Hankel asymptotic expansion beyond; both branches agree to below 1e-11 at
// the switch point (checked in tests). Absolute error <= 1e-10 on |x| <= 50.
double bessel_j0(double x);

// Power-series evaluation of J0 truncated after `terms` terms. Exposed for
// the alternating-series error-bound tests; not meant for large arguments.
double bessel_j0_series(double x, int terms);

// Cyclic Jacobi eigendecomposition. Deterministic: fixed sweep order,
// off-diagonal Frobenius threshold 1e-12 relative to ||A||_F, at most 100
// sweeps. Throws numeric_error with the residual if the threshold is not
// reached.
EigenDecomposition sym_eig(const SymmetricMatrix &a);

// Symmetric square root S with S*S^T == A after clamping eigenvalues in
// [-1e-8*lambda_max, 0) to zero. Eigenvalues below the clamp window raise
// numeric_error (matrix is not positive semidefinite).
RealMatrix psd_sqrt(const SymmetricMatrix &a);

// Largest eigenvalue and its unit eigenvector (sign convention as above).
std::pair<double, std::vector<double>> leading_eigpair(const SymmetricMatrix &a);

} // namespace faskeygen

#endif
