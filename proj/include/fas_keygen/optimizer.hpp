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

#ifndef FAS_KEYGEN_OPTIMIZER_HPP
#define FAS_KEYGEN_OPTIMIZER_HPP

#include <vector>

#include "fas_keygen/kgr.hpp"

namespace faskeygen {

enum class ProblemKind { P1, P2 };

// One convex subproblem instance: the SCA anchor w_prev, the diagonal
// reweighting vector (empty = no l1 constraint), and the model constants.
struct SubproblemSpec {
    ProblemKind kind = ProblemKind::P1;
    cvec w_prev;
    std::vector<double> weights; // V diagonal, size M; empty disables C2.1
    double P_A = 0.0;
    double N_budget = 0.0;
    KgrModel model;
};

struct SolveTrace {
    std::vector<double> objective; // true objective per iterate, [0] = init
    Beamformer final_w;
    bool converged = false;
    int iterations = 0;
};

struct ScaOptions {
    double eps0 = 1e-4;
    int max_iterations = 200;
};

// scale * J * w_prev: the coefficient of the affine minorant of w^H J w at
// w_prev (and, with scale = 1/||f_prev||, the Cauchy-Schwarz surrogate
// coefficient). Throws if the anchor is degenerate (w_prev^H J w_prev == 0).
cvec linearize_quadratic(const cvec &w_prev, const SpatialCorrelation &corr, double scale);

// Euclidean projection of v onto {||w||_2^2 <= P_A}.
cvec project_ball(const cvec &v, double P_A);

// Euclidean projection of v onto {||w||_2^2 <= P_A} n {||V w||_1 <= N}.
// Projection acts on magnitudes; the phases of nonzero outputs equal the
// phases of v. Requires strictly positive weights.
cvec project_ball_intersection(const cvec &v, const std::vector<double> &weights, double P_A,
                               double n_budget);

// Problem form: maximize 2 Re((J w_prev)^H w) over C1 n C2.1. Solved exactly
// by dual bisection in magnitude space (soft threshold + sphere scaling).
Beamformer solve_p1_subproblem(const SubproblemSpec &spec);

// Problem form after slack elimination: maximize
//   beta_ab * a(w) - (beta_abe * q(w))^2 / (beta_ae * a(w) + sigma2)
// with a(w) = Re(w^H J w_prev)/sqrt(q(w_prev)) and q(w) = w^H J w, over
// C1 n C2.1. Concave; solved by projected gradient ascent with backtracking.
Beamformer solve_p2_subproblem(const SubproblemSpec &spec);

// The outer iteration: repeatedly solve the kind-appropriate subproblem,
// re-anchor, and evaluate the true objective (the scenario closed form).
// Iterates are kept on the constraint boundary (full power, capped by the
// l1 budget when it binds; the power constraint is active at the optimum of
// both problems) and the accepted iterate is the best boundary-rescaled
// blend between the anchor and the subproblem solution, so the objective
// trace never decreases. Stops once |R^(l) - R^(l-1)| <= eps0 or after
// max_iterations (non-converged trace, not an error).
SolveTrace sca_solve(ProblemKind kind, const Beamformer &init, const std::vector<double> &weights,
                     double n_budget, double P_A, const KgrModel &model,
                     const ScaOptions &options);

} // namespace faskeygen

#endif
