#pragma once

#include <string>

#include "metascat/types.hpp"

namespace metascat {

// Thrown when a pivot block of the staged elimination is numerically
// singular; carries the name of the stage that failed.
class SingularPivotError : public std::runtime_error {
 public:
  SingularPivotError(const std::string& stage, double rcond)
      : std::runtime_error("singular pivot in " + stage + " (rcond estimate " + std::to_string(rcond) + ")"),
        stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// W = diag(a(c)) + C with a_i = alpha_a on antenna indices and alpha_0 /
// alpha_1 on meta-atom indices according to the configuration bit.
MatrixXc assemble_interaction_matrix(const CompactModelParams& params, const MetaConfig& config);

// Partial inversion of a symmetric interaction matrix by staged block
// elimination: the state-1 meta-atom block is eliminated first, then the
// state-0 block, and the remaining antenna-sized Schur complement is
// inverted. Grouping entities of equal polarizability keeps each pivot
// well scaled even when |alpha_a|, |alpha_0|, |alpha_1| differ strongly.
//
// The kept pivot factorizations also give an O(N^2) solve with W, which the
// calibration adjoint uses to form the needed columns of W^{-1}.
class StagedInverse {
 public:
  // `config` decides the state-0 / state-1 grouping of meta-atom indices.
  // Pivot blocks with a reciprocal-condition estimate below 1/cond_limit
  // raise SingularPivotError.
  StagedInverse(const MatrixXc& w, int n_antennas, const MetaConfig& config,
                double cond_limit = 1e12);

  // [W^{-1}]_AA, the n_antennas x n_antennas antenna block of the inverse.
  const MatrixXc& antenna_block() const { return antenna_block_; }

  // W^{-1} b via block forward/backward substitution in the staged order.
  VectorXc solve(const VectorXc& rhs) const;

  // Columns of W^{-1} at antenna indices, reusing the antenna block: the
  // unit right-hand sides make the stage-1/2 forward passes vanish, so this
  // is three batched back-substitutions. Used by the calibration adjoint.
  MatrixXc antenna_columns(const std::vector<int>& ports) const;

  int size() const { return n_; }
  int n_antennas() const { return n_antennas_; }

 private:
  int n_ = 0;
  int n_antennas_ = 0;
  std::vector<int> perm_;  // grouped order: antennas, state-0, state-1
  int n_zero_ = 0;
  int n_one_ = 0;

  Eigen::PartialPivLU<MatrixXc> lu_one_;   // W_OO
  Eigen::PartialPivLU<MatrixXc> lu_zero_;  // M1_ZZ
  Eigen::PartialPivLU<MatrixXc> lu_ant_;   // final antenna Schur complement
  MatrixXc w_po_;   // coupling of (A,Z) into the state-1 block
  MatrixXc m1_az_;  // coupling of A into the state-0 block after stage 1
  MatrixXc antenna_block_;
};

// rx x tx block of [W^{-1}]_AA for the assembled interaction matrix.
ScatteringMatrix scattering_block(const CompactModelParams& params, const MetaConfig& config,
                                  const PortRoles& roles);

// Signals received for each pilot column: Y = H X.
MatrixXc apply_pilots(const ScatteringMatrix& h, const MatrixXc& pilots);

}  // namespace metascat
