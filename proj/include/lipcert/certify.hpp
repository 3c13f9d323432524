#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/condense.hpp"
#include "lipcert/milp.hpp"
#include "lipcert/types.hpp"

namespace lipcert {

/// Bounds used to linearize complementarity and the norm encoding. The
/// defaults are far above every multiplier, slack, and gain entry seen on the
/// bundled benchmarks; a post-solve check rejects solutions that get within
/// 1% of any bound.
struct BigMConfig {
  double lambda_bar = 1e4;  // multiplier bound
  double r_bar = 1e4;       // slack bound
  double gain_m = 1e4;      // bound on |K| entries and the norm linking rows
};

/// Variable indices of one KKT system inside a MilpModel. delta[i] == -1 for
/// rows whose dual is pinned to zero (no binary exists).
struct KktBlock {
  std::vector<Index> x;  // empty when the block was built for a fixed state
  std::vector<Index> U;
  std::vector<Index> lam;
  std::vector<Index> r;
  std::vector<Index> delta;
};

/// Variable indices of one sampled KKT system sharing the base block's
/// binaries. x is empty in perturbed mode (sample state = x + e_j).
struct SampleBlock {
  std::vector<Index> x;
  std::vector<Index> U;
  std::vector<Index> lam;
  std::vector<Index> r;
};

enum class SampleMode {
  PerturbedShared,  // state x + e_j, two-sided bounds (samples may be infeasible)
  FreeOneSided,     // own free state, one-sided bounds (samples stay feasible)
};

/// Norm-encoding variables: l is the norm value, binaries are the sign
/// pattern plus the row/column selector.
struct NormBlock {
  Index l = -1;
  std::vector<Index> k_plus;   // row-major m x n
  std::vector<Index> k_minus;  // row-major m x n
  Index binaries = 0;
};

KktBlock encode_kkt_block(const CondensedQp& qp, const BigMConfig& cfg,
                          const Vector* x_fixed, MilpModel* model);

SampleBlock encode_sample_block(const CondensedQp& qp, const BigMConfig& cfg,
                                const KktBlock& base, Index j, SampleMode mode,
                                MilpModel* model);

/// m x n continuous variables K with K(:,j) = S_sel (U_sample_j - U_base),
/// returned row-major. Entries are box-bounded by +/- gain_cap.
std::vector<Index> encode_gain(const CondensedQp& qp, const KktBlock& base,
                               const std::vector<SampleBlock>& samples,
                               double gain_cap, MilpModel* model);

/// Lemma-style exact encoding of l = ||K||_p for a variable m x n block.
/// p = 1 uses (m+1)n binaries (column sums), p = Inf uses (n+1)m (row sums).
NormBlock encode_norm_block(const std::vector<Index>& K, Index m, Index n,
                            Norm p, double M, MilpModel* model);

/// Maximize the total first-input variation over the set of states where row
/// i is active. Infeasible: the row is never active on the law's domain.
/// Optimum 0: the law is constant wherever the row is active. Either verdict
/// allows fixing the row's dual to zero.
MilpModel build_exclusion_milp(const CondensedQp& qp, const BigMConfig& cfg,
                               Index row);

enum class RowVerdict { Kept, ExcludedInfeasible, ExcludedZeroGain };

struct RowReduction {
  Index row = 0;
  RowVerdict verdict = RowVerdict::Kept;
  double objective = 0.0;  // exclusion optimum; 0 for infeasible rows
  bool conservative = false;  // kept because the solver hit a limit
  long nodes = 0;
  double seconds = 0.0;
  Index fixed_after = 0;  // cumulative fixed-row count after this row
};

struct ReductionReport {
  std::vector<RowReduction> rows;   // in processing order
  std::vector<Index> fixed_rows;    // final cumulative fixed set, ascending
  bool sequential = true;
  int kept = 0;
  int excluded_infeasible = 0;
  int excluded_zero_gain = 0;
  int conservative_kept = 0;
  double wall_seconds = 0.0;
};

struct ReduceOptions {
  // Sequential mode re-checks each row against the already-reduced problem
  // (more exclusions); the parallel mode checks every row against the input
  // problem independently, which is conservative but embarrassingly parallel.
  bool parallel = false;
  int threads = 1;
  double tolerance_zero = 1e-6;
  long node_limit_per_row = 2000000;
  double time_limit_per_row = kInf;
  std::string export_lp_dir;  // when set, dump each exclusion model
  std::string export_prefix;
};

std::pair<CondensedQp, ReductionReport> reduce_constraints(
    const CondensedQp& qp, const BigMConfig& cfg,
    const ReduceOptions& opts = {});

/// Fill the tuple's verification flags: `verified` requires commuting
/// dynamics, invariant costs, and invariant constraint sets;
/// `norm_invariant_p` additionally requires unit induced norms of Theta and
/// Omega so the gain norm is preserved.
SymmetryTuple verify_symmetry(const MpcProblem& prob, const SymmetryTuple& t);

/// Full Lipschitz MILP: KKT block with free x, n perturbed samples, the gain
/// definition, and the norm encoding; objective maximize l. When `transform`
/// is given (pair Omega^-1, Theta), the norm is taken over Omega^-1 K Theta.
struct FinalMilp {
  MilpModel model;
  KktBlock kkt;
  std::vector<SampleBlock> samples;
  std::vector<Index> K;  // row-major m x n
  NormBlock norm;
};

FinalMilp build_final_milp(const CondensedQp& qp, const BigMConfig& cfg,
                           Norm p,
                           const std::pair<Matrix, Matrix>* transform = nullptr);

enum class CertifyStatus { Optimal, Inconclusive };

struct CertifyTimings {
  double preprocess_seconds = 0.0;
  double final_milp_seconds = 0.0;
};

struct LipschitzResult {
  Norm p = Norm::One;
  CertifyStatus status = CertifyStatus::Optimal;
  double L_star = 0.0;      // optimum, or best lower bound when inconclusive
  double upper_bound = 0.0; // == L_star when optimal
  Vector x_star;
  Matrix K_star;
  Vector delta_star;        // length q, fixed rows at 0
  Index binaries_used = 0;
  CertifyTimings timings;
  ReductionReport reduction;      // empty when reduction was off
  bool reduction_applied = false;
  bool symmetry_applied = false;  // fundamental-domain substitution happened
  int sigma_instances = 1;        // > 1 on the per-tuple fallback path
  bool coverage_checked = false;
  double coverage_fraction = 0.0; // feasible-sample share covered by the group
  long nodes = 0;
  long lp_iterations = 0;
};

struct CertifyOptions {
  bool use_reduction = true;
  bool use_symmetry = true;
  BigMConfig cfg;
  double time_limit_seconds = kInf;  // final MILP budget
  long node_limit = 50000000;
  ReduceOptions reduce;
  std::string export_lp_dir;  // when set, dump every constructed model
  std::string export_prefix;  // defaults to the problem name
};

LipschitzResult compute_lipschitz(const MpcProblem& prob, Norm p,
                                  const CertifyOptions& opts = {});

}  // namespace lipcert
