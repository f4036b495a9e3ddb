#ifndef CATE_LP_ORACLE_HPP_
#define CATE_LP_ORACLE_HPP_

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "cate/assignment.hpp"
#include "cate/topology.hpp"

namespace cate {

/// Exact fractional Restricted Flow Load Balancing:
///
///   min L
///   sum_{i in M_jk} f_ijk = d_jk                      for every demand
///   (fixed_e + sum_{f_ijk over e} f_ijk) / c_e <= L   for every link
///   0 <= f_ijk <= d_jk
struct LpVariable {
  NodeId location = 0;
  NodeId consumer = 0;
  ProviderId provider = 0;
  double upper = 0.0;          // d_jk
  std::vector<LinkId> links;   // routed path location -> consumer
};

struct LpDemandRow {
  NodeId consumer = 0;
  ProviderId provider = 0;
  double volume = 0.0;
  std::vector<std::size_t> variables;
};

struct LpLinkRow {
  LinkId link = 0;
  double capacity = 1.0;
  double fixed_load = 0.0;
  std::vector<std::size_t> variables;
};

struct LpInstance {
  std::vector<LpVariable> variables;  // L is the extra last column
  std::vector<LpDemandRow> demand_rows;
  /// Links carrying a variable or a positive fixed load, by link id.
  std::vector<LpLinkRow> link_rows;

  std::size_t column_count() const { return variables.size() + 1; }
};

LpInstance build_lp(const BinProblem& problem, const NetworkTopology& topo,
                    const RoutingMatrix& routing);

struct LpOptions {
  /// Additive optimality tolerance on L, certified by a dual bound.
  double tolerance = 1e-9;
  std::size_t max_variables = 2000;
};

struct LpSolution {
  double max_utilization = 0.0;   // L*, achieved by `flows`
  double lower_bound = 0.0;       // weak-duality certificate
  std::vector<double> flows;      // f*, indexed like LpInstance::variables
  std::vector<double> link_duals; // w_e >= 0 per link row
  int pivots = 0;
};

/// Solves the instance and certifies L* - lower_bound <= tolerance.
/// Throws kLimit above max_variables and kNumerical (with conditioning
/// diagnostics) when the certificate fails.
LpSolution solve_lp(const LpInstance& instance, const LpOptions& options = {});

/// Dual lower bound for arbitrary link weights w (clamped to >= 0 and
/// rescaled to sum <= 1): sum_e w_e fixed_e/c_e + sum_jk d_jk min_i
/// sum_{e in path(i,j)} w_e/c_e.
double dual_lower_bound(const LpInstance& instance, const std::vector<double>& link_weights);

/// f* as an assignment of the adjustable demands, merged with `fixed`.
FlowAssignment lp_assignment(const LpInstance& instance, const LpSolution& solution,
                             const FlowAssignment& fixed);

/// Free-format MPS export. Names and numbers are printed deterministically
/// (shortest round-trip decimal), so equal instances give identical bytes.
void write_mps(std::ostream& out, const LpInstance& instance, const std::string& name = "CATE");

}  // namespace cate

#endif  // CATE_LP_ORACLE_HPP_
