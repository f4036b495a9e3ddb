#include "cate/lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cate/error.hpp"
#include "cate/simplex.hpp"

namespace cate {

namespace {

std::string variable_name(const LpVariable& v) {
  return fmt::format("f_i{}_j{}_k{}", v.location, v.consumer, v.provider);
}

std::string demand_row_name(const LpDemandRow& row) {
  return fmt::format("dem_j{}_k{}", row.consumer, row.provider);
}

std::string link_row_name(const LpLinkRow& row) { return fmt::format("link_{}", row.link); }

}  // namespace

LpInstance build_lp(const BinProblem& problem, const NetworkTopology& topo,
                    const RoutingMatrix& routing) {
  LpInstance instance;
  const LinkLoadState fixed = recompute_state(problem.fixed, topo, routing);

  std::vector<SubFlowDemand> demands = problem.adjustable;
  std::sort(demands.begin(), demands.end(), [](const SubFlowDemand& a, const SubFlowDemand& b) {
    return std::tie(a.provider, a.consumer) < std::tie(b.provider, b.consumer);
  });
  std::map<LinkId, std::vector<std::size_t>> by_link;
  for (const SubFlowDemand& d : demands) {
    if (!(d.volume > 0.0)) continue;
    LpDemandRow row{d.consumer, d.provider, d.volume, {}};
    for (NodeId i : d.locations) {
      const std::size_t index = instance.variables.size();
      LpVariable v{i, d.consumer, d.provider, d.volume, routing.path(i, d.consumer)};
      for (LinkId l : v.links) by_link[l].push_back(index);
      instance.variables.push_back(std::move(v));
      row.variables.push_back(index);
    }
    instance.demand_rows.push_back(std::move(row));
  }
  for (std::size_t l = 0; l < topo.link_count(); ++l) {
    const auto link = static_cast<LinkId>(l);
    const double load = fixed.volume(link);
    auto it = by_link.find(link);
    if (it == by_link.end() && !(load > 0.0)) continue;
    LpLinkRow row{link, topo.link(link).capacity, load, {}};
    if (it != by_link.end()) row.variables = it->second;
    instance.link_rows.push_back(std::move(row));
  }
  return instance;
}

double dual_lower_bound(const LpInstance& instance, const std::vector<double>& link_weights) {
  std::vector<double> w(link_weights.size());
  double sum = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    w[r] = std::max(0.0, link_weights[r]);
    sum += w[r];
  }
  if (sum > 1.0) {
    for (double& x : w) x /= sum;
  }
  std::map<LinkId, double> per_unit;  // w_e / c_e
  long double bound = 0.0L;
  for (std::size_t r = 0; r < instance.link_rows.size(); ++r) {
    const LpLinkRow& row = instance.link_rows[r];
    per_unit[row.link] = w[r] / row.capacity;
    bound += static_cast<long double>(w[r]) * row.fixed_load / row.capacity;
  }
  for (const LpDemandRow& row : instance.demand_rows) {
    double cheapest = std::numeric_limits<double>::infinity();
    for (std::size_t v : row.variables) {
      double cost = 0.0;
      for (LinkId l : instance.variables[v].links) {
        auto it = per_unit.find(l);
        if (it != per_unit.end()) cost += it->second;
      }
      cheapest = std::min(cheapest, cost);
    }
    bound += static_cast<long double>(row.volume) * cheapest;
  }
  return static_cast<double>(bound);
}

LpSolution solve_lp(const LpInstance& instance, const LpOptions& options) {
  const std::size_t nv = instance.variables.size();
  if (nv > options.max_variables) {
    throw Error(ErrorKind::kLimit,
                fmt::format("LP oracle refuses {} variables (limit {}); use the greedy engines",
                            nv, options.max_variables));
  }
  const auto rows = static_cast<Eigen::Index>(instance.demand_rows.size() + instance.link_rows.size());
  const auto cols = static_cast<Eigen::Index>(nv + 1);
  const Eigen::Index l_col = cols - 1;

  LinearProgram<double> lp;
  lp.a = Eigen::MatrixXd::Zero(rows, cols);
  lp.b = Eigen::VectorXd::Zero(rows);
  lp.c = Eigen::VectorXd::Zero(cols);
  lp.c[l_col] = 1.0;
  Eigen::Index r = 0;
  for (const LpDemandRow& row : instance.demand_rows) {
    for (std::size_t v : row.variables) lp.a(r, static_cast<Eigen::Index>(v)) = 1.0;
    lp.b[r] = row.volume;
    lp.sense.push_back(RowSense::kEqual);
    ++r;
  }
  // L - sum f / c_e >= fixed_e / c_e
  for (const LpLinkRow& row : instance.link_rows) {
    for (std::size_t v : row.variables) lp.a(r, static_cast<Eigen::Index>(v)) = -1.0 / row.capacity;
    lp.a(r, l_col) = 1.0;
    lp.b[r] = row.fixed_load / row.capacity;
    lp.sense.push_back(RowSense::kGreaterEqual);
    ++r;
  }

  auto diagnostics = [&]() {
    double cmin = std::numeric_limits<double>::infinity();
    double cmax = 0.0;
    for (const LpLinkRow& row : instance.link_rows) {
      cmin = std::min(cmin, row.capacity);
      cmax = std::max(cmax, row.capacity);
    }
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (const LpDemandRow& row : instance.demand_rows) {
      dmin = std::min(dmin, row.volume);
      dmax = std::max(dmax, row.volume);
    }
    return fmt::format("rows={} cols={} capacity_ratio={:.3g} demand_ratio={:.3g}", rows, cols,
                       cmax > 0.0 ? cmax / cmin : 0.0, dmax > 0.0 ? dmax / dmin : 0.0);
  };

  DenseSimplex<double> simplex;
  const SimplexSolution<double> sol = simplex.solve(lp);
  if (sol.status != SimplexStatus::kOptimal) {
    throw Error(ErrorKind::kNumerical,
                fmt::format("LP oracle: simplex did not reach optimality (status {}); {}",
                            static_cast<int>(sol.status), diagnostics()));
  }

  LpSolution out;
  out.pivots = sol.pivots;
  out.flows.assign(nv, 0.0);
  for (std::size_t v = 0; v < nv; ++v) out.flows[v] = std::max(0.0, sol.x[static_cast<Eigen::Index>(v)]);
  // Restore exact demand satisfaction on the largest variable of each row.
  for (const LpDemandRow& row : instance.demand_rows) {
    std::size_t largest = row.variables.front();
    double sum = 0.0;
    for (std::size_t v : row.variables) {
      sum += out.flows[v];
      if (out.flows[v] > out.flows[largest]) largest = v;
    }
    out.flows[largest] = std::max(0.0, out.flows[largest] + row.volume - sum);
  }
  double achieved = 0.0;
  for (const LpLinkRow& row : instance.link_rows) {
    long double load = row.fixed_load;
    for (std::size_t v : row.variables) load += out.flows[v];
    achieved = std::max(achieved, static_cast<double>(load / row.capacity));
  }
  out.max_utilization = achieved;

  out.link_duals.resize(instance.link_rows.size());
  for (std::size_t k = 0; k < instance.link_rows.size(); ++k) {
    out.link_duals[k] = sol.duals[static_cast<Eigen::Index>(instance.demand_rows.size() + k)];
  }
  out.lower_bound = dual_lower_bound(instance, out.link_duals);
  if (out.max_utilization - out.lower_bound > options.tolerance) {
    throw Error(ErrorKind::kNumerical,
                fmt::format("LP oracle: optimality gap {:.3g} exceeds tolerance {:.3g}; {}",
                            out.max_utilization - out.lower_bound, options.tolerance,
                            diagnostics()));
  }
  return out;
}

FlowAssignment lp_assignment(const LpInstance& instance, const LpSolution& solution,
                             const FlowAssignment& fixed) {
  FlowAssignment out = fixed;
  for (std::size_t v = 0; v < instance.variables.size(); ++v) {
    if (solution.flows[v] > 0.0) {
      const LpVariable& var = instance.variables[v];
      out.add(var.location, var.consumer, var.provider, solution.flows[v], true);
    }
  }
  out.canonicalize();
  return out;
}

void write_mps(std::ostream& out, const LpInstance& instance, const std::string& name) {
  fmt::print(out, "NAME {}\n", name);
  out << "ROWS\n N obj\n";
  for (const LpDemandRow& row : instance.demand_rows) fmt::print(out, " E {}\n", demand_row_name(row));
  for (const LpLinkRow& row : instance.link_rows) fmt::print(out, " G {}\n", link_row_name(row));

  // Column-wise coefficients.
  std::vector<std::vector<std::pair<std::string, double>>> columns(instance.variables.size());
  for (const LpDemandRow& row : instance.demand_rows) {
    for (std::size_t v : row.variables) columns[v].emplace_back(demand_row_name(row), 1.0);
  }
  for (const LpLinkRow& row : instance.link_rows) {
    for (std::size_t v : row.variables) columns[v].emplace_back(link_row_name(row), -1.0 / row.capacity);
  }
  out << "COLUMNS\n";
  for (std::size_t v = 0; v < instance.variables.size(); ++v) {
    const std::string col = variable_name(instance.variables[v]);
    for (const auto& [row, value] : columns[v]) fmt::print(out, " {} {} {}\n", col, row, value);
  }
  out << " L obj 1\n";
  for (const LpLinkRow& row : instance.link_rows) fmt::print(out, " L {} 1\n", link_row_name(row));
  out << "RHS\n";
  for (const LpDemandRow& row : instance.demand_rows) {
    fmt::print(out, " rhs {} {}\n", demand_row_name(row), row.volume);
  }
  for (const LpLinkRow& row : instance.link_rows) {
    if (row.fixed_load > 0.0) {
      fmt::print(out, " rhs {} {}\n", link_row_name(row), row.fixed_load / row.capacity);
    }
  }
  out << "BOUNDS\n";
  for (const LpVariable& v : instance.variables) {
    fmt::print(out, " UP bnd {} {}\n", variable_name(v), v.upper);
  }
  out << "ENDATA\n";
}

}  // namespace cate
