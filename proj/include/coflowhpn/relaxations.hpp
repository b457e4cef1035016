#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "coflowhpn/lp_core.hpp"
#include "coflowhpn/model.hpp"

namespace coflowhpn {

/// Doubling time horizon: boundaries tau[l] = 2^l for l = 0..L, so interval
/// l covers (2^{l-1}, 2^l] with interval 1 starting at tau_0 = 1.
struct Horizon {
  int L = 1;
  std::vector<double> tau;

  double boundary(int l) const { return tau[l]; }
};

inline Horizon make_horizon(int L) {
  Horizon h;
  h.L = L;
  h.tau.resize(L + 1);
  double t = 1.0;
  for (int l = 0; l <= L; ++l) {
    h.tau[l] = t;
    t *= 2.0;
  }
  return h;
}

/// L = ceil(log2(max release + worst per-port total load over the slowest
/// core)), at least 1. Computed as the smallest L with 2^L covering the
/// argument so exact powers of two do not round up.
inline Horizon compute_horizon(const CoflowInstance& inst) {
  const PortLoads loads = port_loads(inst);
  double max_release = 0.0;
  for (const Coflow& c : inst.coflows) max_release = std::max(max_release, c.release);

  double worst_port = 0.0;
  for (int p = 1; p <= inst.num_ports; ++p) {
    double in_sum = 0.0, out_sum = 0.0;
    for (int f = 0; f < inst.coflow_count(); ++f) {
      in_sum += loads.input(f, p);
      out_sum += loads.output(f, p);
    }
    worst_port = std::max({worst_port, in_sum, out_sum});
  }

  const double arg = max_release + worst_port / inst.min_speed();
  int L = 1;
  double pow2 = 2.0;
  while (pow2 < arg * (1.0 - 1e-12)) {
    pow2 *= 2.0;
    ++L;
  }
  return make_horizon(L);
}

/// Key of one fractional assignment variable: item (coflow or flow), core
/// id, and interval index (0 when the relaxation is not horizon-indexed).
/// Item-major ordering keeps each item's entries contiguous in a map.
struct XVarKey {
  FlowKey item;
  int core = 0;
  int interval = 0;

  friend auto operator<=>(const XVarKey&, const XVarKey&) = default;
};

/// Typed view of an optimal relaxation solution: fractional core (and
/// interval) assignments per item plus the LP completion times that drive
/// list-scheduling priorities.
struct FractionalAssignment {
  Mode mode = Mode::indivisible;
  bool horizon_indexed = false;
  int num_intervals = 0;                 // L when horizon_indexed
  std::map<XVarKey, double> x;           // clamped to [0,1], zeros omitted
  std::map<FlowKey, double> completion;  // C per item; divisible TWCT also
                                         // carries coflow-level entries
  double makespan = 0.0;                 // makespan relaxations only
  double objective = 0.0;

  /// All items carrying fractional mass, in key order.
  std::vector<FlowKey> items() const {
    std::vector<FlowKey> out;
    for (const auto& [key, v] : x) {
      if (out.empty() || out.back() != key.item) out.push_back(key.item);
    }
    return out;
  }

  double total_mass(const FlowKey& item) const {
    double sum = 0.0;
    for (auto it = x.lower_bound(XVarKey{item, 0, 0});
         it != x.end() && it->first.item == item; ++it)
      sum += it->second;
    return sum;
  }

  /// Mass per core summed over intervals.
  std::map<int, double> core_marginals(const FlowKey& item) const {
    std::map<int, double> out;
    for (auto it = x.lower_bound(XVarKey{item, 0, 0});
         it != x.end() && it->first.item == item; ++it)
      out[it->first.core] += it->second;
    return out;
  }

  /// Mass per interval summed over cores (horizon-indexed only).
  std::vector<double> interval_mass(const FlowKey& item) const {
    std::vector<double> out(num_intervals + 1, 0.0);
    for (auto it = x.lower_bound(XVarKey{item, 0, 0});
         it != x.end() && it->first.item == item; ++it)
      out[it->first.interval] += it->second;
    return out;
  }
};

enum class LpKind { indiv_makespan, indiv_twct, div_makespan, div_twct };

inline Mode mode_of(LpKind kind) {
  return (kind == LpKind::indiv_makespan || kind == LpKind::indiv_twct)
             ? Mode::indivisible
             : Mode::divisible;
}

inline bool horizon_indexed(LpKind kind) {
  return kind == LpKind::indiv_twct || kind == LpKind::div_twct;
}

/// A built relaxation: the LP plus the typed column layout needed to decode
/// solver output back into a FractionalAssignment, and the row layout the
/// crash basis builds on.
struct RelaxationLp {
  LpKind kind = LpKind::indiv_makespan;
  LinearProgram lp;
  Horizon horizon;  // L == 0 horizon for makespan relaxations
  std::map<XVarKey, int> x_col;
  std::map<FlowKey, int> completion_col;
  int makespan_col = -1;

  // Row indexes. Transfer rows are keyed (item, port) with input ports
  // positive and output ports negative; flow-level relaxations use port 0.
  std::map<FlowKey, int> assign_row;
  std::map<std::pair<FlowKey, int>, int> transfer_row;
  std::map<FlowKey, int> interval_lb_row;              // TWCT kinds
  std::map<FlowKey, int> couple_row;                   // flow TWCT only
  std::map<std::pair<int, int>, int> capacity_row;     // (signed port, core)
                                                       // makespan kinds only
};

// The divisible TWCT relaxation grows as m * |flows| * L; beyond this the
// internal solver is not the right tool and callers should export instead.
inline constexpr int kMaxLpVariables = 200'000;

namespace detail {

inline std::string x_name(const XVarKey& k, LpKind kind) {
  std::string s = "x_" + std::to_string(k.core);
  if (mode_of(kind) == Mode::divisible)
    s += "_" + std::to_string(k.item.src) + "_" + std::to_string(k.item.dst);
  s += "_" + std::to_string(k.item.coflow);
  if (horizon_indexed(kind)) s += "_" + std::to_string(k.interval);
  return s;
}

inline std::string c_name(const FlowKey& k) {
  if (k.src == 0 && k.dst == 0) return "C_" + std::to_string(k.coflow);
  return "C_" + std::to_string(k.src) + "_" + std::to_string(k.dst) + "_" +
         std::to_string(k.coflow);
}

}  // namespace detail

/// LP (coflow makespan): fractional coflow-to-core assignment minimizing the
/// makespan E. Release times play no role in the makespan problem.
inline RelaxationLp build_indivisible_makespan_lp(const CoflowInstance& inst) {
  const PortLoads loads = port_loads(inst);
  RelaxationLp rel;
  rel.kind = LpKind::indiv_makespan;
  LinearProgram& lp = rel.lp;

  for (const Coflow& c : inst.coflows) {
    for (const Core& core : inst.cores) {
      const XVarKey key{coflow_key(c.id), core.id, 0};
      rel.x_col[key] = lp.add_variable(detail::x_name(key, rel.kind));
    }
  }
  for (const Coflow& c : inst.coflows)
    rel.completion_col[coflow_key(c.id)] = lp.add_variable(detail::c_name(coflow_key(c.id)));
  rel.makespan_col = lp.add_variable("E");
  lp.set_objective(rel.makespan_col, 1.0);

  for (int f = 0; f < inst.coflow_count(); ++f) {
    const Coflow& c = inst.coflows[f];
    const int c_col = rel.completion_col.at(coflow_key(c.id));

    std::vector<std::pair<int, double>> assign;
    for (const Core& core : inst.cores)
      assign.emplace_back(rel.x_col.at(XVarKey{coflow_key(c.id), core.id, 0}), 1.0);
    rel.assign_row[coflow_key(c.id)] = lp.num_rows();
    lp.add_row("asg_" + std::to_string(c.id), std::move(assign), Relation::eq, 1.0);

    auto transfer_row = [&](int port, double load, int signed_port, const char* tag) {
      if (load <= 0.0) return;
      std::vector<std::pair<int, double>> row;
      for (const Core& core : inst.cores)
        row.emplace_back(rel.x_col.at(XVarKey{coflow_key(c.id), core.id, 0}),
                         load / core.speed);
      row.emplace_back(c_col, -1.0);
      rel.transfer_row[{coflow_key(c.id), signed_port}] = lp.num_rows();
      lp.add_row(std::string(tag) + std::to_string(c.id) + "_" + std::to_string(port),
                 std::move(row), Relation::le, 0.0);
    };
    for (int i = 1; i <= inst.num_ports; ++i) transfer_row(i, loads.input(f, i), i, "tin_");
    for (int j = 1; j <= inst.num_ports; ++j) transfer_row(j, loads.output(f, j), -j, "tout_");

    lp.add_row("fin_" + std::to_string(c.id), {{c_col, 1.0}, {rel.makespan_col, -1.0}},
               Relation::le, 0.0);
  }

  auto capacity_rows = [&](bool input, const char* tag) {
    for (int p = 1; p <= inst.num_ports; ++p) {
      bool used = false;
      for (int f = 0; f < inst.coflow_count() && !used; ++f)
        used = (input ? loads.input(f, p) : loads.output(f, p)) > 0.0;
      if (!used) continue;
      for (const Core& core : inst.cores) {
        std::vector<std::pair<int, double>> row;
        for (int f = 0; f < inst.coflow_count(); ++f) {
          const double load = input ? loads.input(f, p) : loads.output(f, p);
          if (load <= 0.0) continue;
          row.emplace_back(
              rel.x_col.at(XVarKey{coflow_key(inst.coflows[f].id), core.id, 0}),
              load / core.speed);
        }
        row.emplace_back(rel.makespan_col, -1.0);
        rel.capacity_row[{input ? p : -p, core.id}] = lp.num_rows();
        lp.add_row(std::string(tag) + std::to_string(p) + "_" + std::to_string(core.id),
                   std::move(row), Relation::le, 0.0);
      }
    }
  };
  capacity_rows(true, "cin_");
  capacity_rows(false, "cout_");
  return rel;
}

/// LP (flow makespan): same bound at flow granularity; flows of one coflow
/// may split their fractional mass independently.
inline RelaxationLp build_divisible_makespan_lp(const CoflowInstance& inst) {
  RelaxationLp rel;
  rel.kind = LpKind::div_makespan;
  LinearProgram& lp = rel.lp;

  for (const Coflow& c : inst.coflows)
    for (const Flow& fl : c.flows)
      for (const Core& core : inst.cores) {
        const XVarKey key{FlowKey{fl.src, fl.dst, c.id}, core.id, 0};
        rel.x_col[key] = lp.add_variable(detail::x_name(key, rel.kind));
      }
  for (const Coflow& c : inst.coflows)
    for (const Flow& fl : c.flows) {
      const FlowKey key{fl.src, fl.dst, c.id};
      rel.completion_col[key] = lp.add_variable(detail::c_name(key));
    }
  rel.makespan_col = lp.add_variable("E");
  lp.set_objective(rel.makespan_col, 1.0);

  for (const Coflow& c : inst.coflows) {
    for (const Flow& fl : c.flows) {
      const FlowKey key{fl.src, fl.dst, c.id};
      const int c_col = rel.completion_col.at(key);
      const std::string suffix = std::to_string(fl.src) + "_" +
                                 std::to_string(fl.dst) + "_" + std::to_string(c.id);

      std::vector<std::pair<int, double>> assign;
      std::vector<std::pair<int, double>> transfer;
      for (const Core& core : inst.cores) {
        const int col = rel.x_col.at(XVarKey{key, core.id, 0});
        assign.emplace_back(col, 1.0);
        transfer.emplace_back(col, fl.size / core.speed);
      }
      transfer.emplace_back(c_col, -1.0);
      rel.assign_row[key] = lp.num_rows();
      lp.add_row("asg_" + suffix, std::move(assign), Relation::eq, 1.0);
      rel.transfer_row[{key, 0}] = lp.num_rows();
      lp.add_row("t_" + suffix, std::move(transfer), Relation::le, 0.0);
      lp.add_row("fin_" + suffix, {{c_col, 1.0}, {rel.makespan_col, -1.0}},
                 Relation::le, 0.0);
    }
  }

  auto capacity_rows = [&](bool input, const char* tag) {
    for (int p = 1; p <= inst.num_ports; ++p) {
      for (const Core& core : inst.cores) {
        std::vector<std::pair<int, double>> row;
        for (const Coflow& c : inst.coflows)
          for (const Flow& fl : c.flows) {
            if ((input ? fl.src : fl.dst) != p) continue;
            row.emplace_back(rel.x_col.at(XVarKey{FlowKey{fl.src, fl.dst, c.id},
                                                  core.id, 0}),
                             fl.size / core.speed);
          }
        if (row.empty()) continue;
        row.emplace_back(rel.makespan_col, -1.0);
        rel.capacity_row[{input ? p : -p, core.id}] = lp.num_rows();
        lp.add_row(std::string(tag) + std::to_string(p) + "_" + std::to_string(core.id),
                   std::move(row), Relation::le, 0.0);
      }
    }
  };
  capacity_rows(true, "cin_");
  capacity_rows(false, "cout_");
  return rel;
}

/// LP (coflow TWCT): interval-indexed relaxation minimizing sum w_f C_f.
/// x_{kfl} is the fraction of coflow f finishing on core k within interval
/// l; prefix rows cap what each (port, core) can move by tau_l.
inline RelaxationLp build_indivisible_twct_lp(const CoflowInstance& inst,
                                              const Horizon& horizon) {
  const PortLoads loads = port_loads(inst);
  RelaxationLp rel;
  rel.kind = LpKind::indiv_twct;
  rel.horizon = horizon;
  LinearProgram& lp = rel.lp;
  const int L = horizon.L;

  for (const Coflow& c : inst.coflows)
    for (const Core& core : inst.cores)
      for (int l = 1; l <= L; ++l) {
        const XVarKey key{coflow_key(c.id), core.id, l};
        rel.x_col[key] = lp.add_variable(detail::x_name(key, rel.kind));
      }
  for (const Coflow& c : inst.coflows) {
    const int col = lp.add_variable(detail::c_name(coflow_key(c.id)));
    rel.completion_col[coflow_key(c.id)] = col;
    lp.set_objective(col, c.weight);
  }

  for (int f = 0; f < inst.coflow_count(); ++f) {
    const Coflow& c = inst.coflows[f];
    const int c_col = rel.completion_col.at(coflow_key(c.id));

    std::vector<std::pair<int, double>> assign;
    std::vector<std::pair<int, double>> interval_lb;
    for (const Core& core : inst.cores)
      for (int l = 1; l <= L; ++l) {
        const int col = rel.x_col.at(XVarKey{coflow_key(c.id), core.id, l});
        assign.emplace_back(col, 1.0);
        interval_lb.emplace_back(col, horizon.tau[l - 1]);
      }
    interval_lb.emplace_back(c_col, -1.0);
    rel.assign_row[coflow_key(c.id)] = lp.num_rows();
    lp.add_row("asg_" + std::to_string(c.id), std::move(assign), Relation::eq, 1.0);
    rel.interval_lb_row[coflow_key(c.id)] = lp.num_rows();
    lp.add_row("ilb_" + std::to_string(c.id), std::move(interval_lb), Relation::le, 0.0);

    auto transfer_row = [&](int port, double load, int signed_port, const char* tag) {
      if (load <= 0.0) return;
      std::vector<std::pair<int, double>> row;
      for (const Core& core : inst.cores) {
        const double coeff = load / core.speed;
        for (int l = 1; l <= L; ++l)
          row.emplace_back(rel.x_col.at(XVarKey{coflow_key(c.id), core.id, l}), coeff);
      }
      row.emplace_back(c_col, -1.0);
      rel.transfer_row[{coflow_key(c.id), signed_port}] = lp.num_rows();
      lp.add_row(std::string(tag) + std::to_string(c.id) + "_" + std::to_string(port),
                 std::move(row), Relation::le, -c.release);
    };
    for (int i = 1; i <= inst.num_ports; ++i) transfer_row(i, loads.input(f, i), i, "tin_");
    for (int j = 1; j <= inst.num_ports; ++j) transfer_row(j, loads.output(f, j), -j, "tout_");
  }

  auto capacity_rows = [&](bool input, const char* tag) {
    for (int p = 1; p <= inst.num_ports; ++p) {
      bool used = false;
      for (int f = 0; f < inst.coflow_count() && !used; ++f)
        used = (input ? loads.input(f, p) : loads.output(f, p)) > 0.0;
      if (!used) continue;
      for (const Core& core : inst.cores) {
        for (int l = 1; l <= L; ++l) {
          std::vector<std::pair<int, double>> row;
          for (int f = 0; f < inst.coflow_count(); ++f) {
            const double load = input ? loads.input(f, p) : loads.output(f, p);
            if (load <= 0.0) continue;
            const double coeff = load / core.speed;
            for (int u = 1; u <= l; ++u)
              row.emplace_back(
                  rel.x_col.at(XVarKey{coflow_key(inst.coflows[f].id), core.id, u}),
                  coeff);
          }
          lp.add_row(std::string(tag) + std::to_string(p) + "_" +
                         std::to_string(core.id) + "_" + std::to_string(l),
                     std::move(row), Relation::le, horizon.tau[l]);
        }
      }
    }
  };
  capacity_rows(true, "cin_");
  capacity_rows(false, "cout_");
  return rel;
}

/// LP (flow TWCT): the flow-level interval relaxation. Couples per-flow
/// completions into the coflow completion the objective charges.
inline RelaxationLp build_divisible_twct_lp(const CoflowInstance& inst,
                                            const Horizon& horizon) {
  RelaxationLp rel;
  rel.kind = LpKind::div_twct;
  rel.horizon = horizon;
  LinearProgram& lp = rel.lp;
  const int L = horizon.L;

  const long var_count = static_cast<long>(inst.core_count()) * inst.flow_count() * L +
                         inst.flow_count() + inst.coflow_count();
  if (var_count > kMaxLpVariables)
    throw LpError("divisible TWCT LP needs " + std::to_string(var_count) +
                  " variables (cap " + std::to_string(kMaxLpVariables) +
                  "); export it for an external solver");

  for (const Coflow& c : inst.coflows)
    for (const Flow& fl : c.flows)
      for (const Core& core : inst.cores)
        for (int l = 1; l <= L; ++l) {
          const XVarKey key{FlowKey{fl.src, fl.dst, c.id}, core.id, l};
          rel.x_col[key] = lp.add_variable(detail::x_name(key, rel.kind));
        }
  for (const Coflow& c : inst.coflows)
    for (const Flow& fl : c.flows) {
      const FlowKey key{fl.src, fl.dst, c.id};
      rel.completion_col[key] = lp.add_variable(detail::c_name(key));
    }
  for (const Coflow& c : inst.coflows) {
    const int col = lp.add_variable(detail::c_name(coflow_key(c.id)));
    rel.completion_col[coflow_key(c.id)] = col;
    lp.set_objective(col, c.weight);
  }

  for (const Coflow& c : inst.coflows) {
    const int coflow_col = rel.completion_col.at(coflow_key(c.id));
    for (const Flow& fl : c.flows) {
      const FlowKey key{fl.src, fl.dst, c.id};
      const int c_col = rel.completion_col.at(key);
      const std::string suffix = std::to_string(fl.src) + "_" +
                                 std::to_string(fl.dst) + "_" + std::to_string(c.id);

      std::vector<std::pair<int, double>> assign;
      std::vector<std::pair<int, double>> transfer;
      std::vector<std::pair<int, double>> interval_lb;
      for (const Core& core : inst.cores) {
        const double coeff = fl.size / core.speed;
        for (int l = 1; l <= L; ++l) {
          const int col = rel.x_col.at(XVarKey{key, core.id, l});
          assign.emplace_back(col, 1.0);
          transfer.emplace_back(col, coeff);
          interval_lb.emplace_back(col, horizon.tau[l - 1]);
        }
      }
      transfer.emplace_back(c_col, -1.0);
      interval_lb.emplace_back(c_col, -1.0);
      rel.assign_row[key] = lp.num_rows();
      lp.add_row("asg_" + suffix, std::move(assign), Relation::eq, 1.0);
      rel.transfer_row[{key, 0}] = lp.num_rows();
      lp.add_row("t_" + suffix, std::move(transfer), Relation::le, -c.release);
      rel.interval_lb_row[key] = lp.num_rows();
      lp.add_row("ilb_" + suffix, std::move(interval_lb), Relation::le, 0.0);
      rel.couple_row[key] = lp.num_rows();
      lp.add_row("cpl_" + suffix, {{c_col, 1.0}, {coflow_col, -1.0}}, Relation::le, 0.0);
    }
  }

  auto capacity_rows = [&](bool input, const char* tag) {
    for (int p = 1; p <= inst.num_ports; ++p) {
      for (const Core& core : inst.cores) {
        // Flows through this (port, core); reused for every prefix length.
        std::vector<std::pair<FlowKey, double>> through;
        for (const Coflow& c : inst.coflows)
          for (const Flow& fl : c.flows)
            if ((input ? fl.src : fl.dst) == p)
              through.emplace_back(FlowKey{fl.src, fl.dst, c.id},
                                   fl.size / core.speed);
        if (through.empty()) continue;
        for (int l = 1; l <= L; ++l) {
          std::vector<std::pair<int, double>> row;
          row.reserve(through.size() * l);
          for (const auto& [key, coeff] : through)
            for (int u = 1; u <= l; ++u)
              row.emplace_back(rel.x_col.at(XVarKey{key, core.id, u}), coeff);
          lp.add_row(std::string(tag) + std::to_string(p) + "_" +
                         std::to_string(core.id) + "_" + std::to_string(l),
                     std::move(row), Relation::le, horizon.tau[l]);
        }
      }
    }
  };
  capacity_rows(true, "cin_");
  capacity_rows(false, "cout_");
  return rel;
}

/// Builds a feasible warm-start basis for any of the four relaxations, so
/// the solver can skip phase 1. Every item rides the fastest core; the
/// horizon-indexed kinds greedily pick the earliest interval that respects
/// the prefix capacities there (the last interval always fits, by the
/// horizon definition). Completion variables sit on their binding lower
/// bound row; everything else is slack. The result is permuted-triangular
/// by construction.
inline BasisHint crash_basis(const RelaxationLp& rel, const CoflowInstance& inst) {
  const int n = rel.lp.num_variables();
  BasisHint hint;
  hint.basic.resize(rel.lp.num_rows());
  for (int r = 0; r < rel.lp.num_rows(); ++r) hint.basic[r] = n + r;

  const Core* fastest = &inst.cores[0];
  for (const Core& c : inst.cores)
    if (c.speed > fastest->speed) fastest = &c;
  const double s = fastest->speed;
  const PortLoads loads = port_loads(inst);

  // Per-item loads keyed by signed port: +p input, -p output.
  struct ItemInfo {
    FlowKey key;
    std::map<int, double> port_load;
    double release = 0.0;
    double bottleneck = 0.0;
  };
  std::vector<ItemInfo> items;
  for (int f = 0; f < inst.coflow_count(); ++f) {
    const Coflow& c = inst.coflows[f];
    if (mode_of(rel.kind) == Mode::divisible) {
      for (const Flow& fl : c.flows) {
        ItemInfo it;
        it.key = FlowKey{fl.src, fl.dst, c.id};
        it.release = c.release;
        it.bottleneck = fl.size;
        it.port_load[fl.src] += fl.size;
        it.port_load[-fl.dst] += fl.size;
        items.push_back(std::move(it));
      }
    } else {
      ItemInfo it;
      it.key = coflow_key(c.id);
      it.release = c.release;
      for (int p = 1; p <= inst.num_ports; ++p) {
        if (loads.input(f, p) > 0.0) it.port_load[p] = loads.input(f, p);
        if (loads.output(f, p) > 0.0) it.port_load[-p] = loads.output(f, p);
      }
      for (const auto& [p, v] : it.port_load) it.bottleneck = std::max(it.bottleneck, v);
      items.push_back(std::move(it));
    }
  }

  // Deterministic argmax port: largest load, inputs before outputs, then
  // smaller port number.
  auto argmax_port = [](const ItemInfo& it) {
    int best = 0;
    double best_load = -1.0;
    for (const auto& [p, v] : it.port_load) {
      const bool better =
          v > best_load + 1e-15 ||
          (v >= best_load - 1e-15 &&
           (best == 0 || (p > 0 && best < 0) ||
            ((p > 0) == (best > 0) && std::abs(p) < std::abs(best))));
      if (better) {
        best = p;
        best_load = std::max(best_load, v);
      }
    }
    return best;
  };

  if (horizon_indexed(rel.kind)) {
    const int L = rel.horizon.L;
    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ca = items[a].release + items[a].bottleneck / s;
      const double cb = items[b].release + items[b].bottleneck / s;
      if (ca != cb) return ca < cb;
      return items[a].key < items[b].key;
    });

    std::map<int, std::vector<double>> placed;  // signed port -> load at interval l
    std::map<FlowKey, double> completion_of;
    for (std::size_t idx : order) {
      const ItemInfo& it = items[idx];
      int chosen = L;
      for (int l = 1; l <= L && chosen == L; ++l) {
        bool ok = true;
        for (const auto& [p, v] : it.port_load) {
          auto found = placed.find(p);
          double prefix = 0.0;
          for (int u = l; u <= L && ok; ++u) {
            if (found != placed.end()) {
              prefix = 0.0;
              for (int w = 1; w <= u; ++w) prefix += found->second[w];
            }
            if ((prefix + v) > rel.horizon.tau[u] * s * (1.0 + 1e-12)) ok = false;
          }
          if (!ok) break;
        }
        if (ok) chosen = l;
      }
      for (const auto& [p, v] : it.port_load) {
        auto& vec = placed[p];
        if (vec.empty()) vec.assign(L + 1, 0.0);
        vec[chosen] += v;
      }

      hint.basic[rel.assign_row.at(it.key)] =
          rel.x_col.at(XVarKey{it.key, fastest->id, chosen});

      const double transfer_c = it.release + it.bottleneck / s;
      const double interval_c = rel.horizon.tau[chosen - 1];
      completion_of[it.key] = std::max(transfer_c, interval_c);
      if (transfer_c >= interval_c) {
        const int port = mode_of(rel.kind) == Mode::divisible ? 0 : argmax_port(it);
        hint.basic[rel.transfer_row.at({it.key, port})] = rel.completion_col.at(it.key);
      } else {
        hint.basic[rel.interval_lb_row.at(it.key)] = rel.completion_col.at(it.key);
      }
    }

    if (rel.kind == LpKind::div_twct) {
      // Coflow completions pin to their latest flow's coupling row.
      std::map<int, FlowKey> argmax_flow;
      for (const auto& [key, c] : completion_of) {
        auto found = argmax_flow.find(key.coflow);
        if (found == argmax_flow.end() || c > completion_of.at(found->second))
          argmax_flow[key.coflow] = key;
      }
      for (const auto& [f, key] : argmax_flow)
        hint.basic[rel.couple_row.at(key)] = rel.completion_col.at(coflow_key(f));
    }
  } else {
    for (const ItemInfo& it : items) {
      hint.basic[rel.assign_row.at(it.key)] =
          rel.x_col.at(XVarKey{it.key, fastest->id, 0});
      const int port = mode_of(rel.kind) == Mode::divisible ? 0 : argmax_port(it);
      hint.basic[rel.transfer_row.at({it.key, port})] = rel.completion_col.at(it.key);
    }

    // With everything stacked on one core, a port capacity row always
    // dominates the single-item completions, so E pivots there.
    int best_port = 0;
    double best_total = -1.0;
    std::map<int, double> totals;
    for (const ItemInfo& it : items)
      for (const auto& [p, v] : it.port_load) totals[p] += v;
    for (const auto& [p, v] : totals) {
      const bool better =
          v > best_total + 1e-15 ||
          (v >= best_total - 1e-15 &&
           (best_port == 0 || (p > 0 && best_port < 0) ||
            ((p > 0) == (best_port > 0) && std::abs(p) < std::abs(best_port))));
      if (better) {
        best_port = p;
        best_total = std::max(best_total, v);
      }
    }
    hint.basic[rel.capacity_row.at({best_port, fastest->id})] = rel.makespan_col;
  }
  return hint;
}

/// solve_lp with the structured crash start.
inline LpSolution solve_relaxation(const RelaxationLp& rel, const CoflowInstance& inst,
                                   const SimplexOptions& opt = {}) {
  const BasisHint hint = crash_basis(rel, inst);
  return solve_lp(rel.lp, opt, &hint);
}

/// Decodes an optimal solver result into the typed fractional assignment,
/// clamping round-off and re-verifying the per-item mass invariant.
inline FractionalAssignment decode_solution(const RelaxationLp& rel,
                                            const LpSolution& sol) {
  if (sol.status != LpStatus::optimal)
    throw LpError("decode_solution requires an optimal LP solution");

  FractionalAssignment frac;
  frac.mode = mode_of(rel.kind);
  frac.horizon_indexed = horizon_indexed(rel.kind);
  frac.num_intervals = frac.horizon_indexed ? rel.horizon.L : 0;
  frac.objective = sol.objective_value;
  if (rel.makespan_col >= 0) frac.makespan = sol.primal[rel.makespan_col];

  std::map<FlowKey, double> mass;
  for (const auto& [key, col] : rel.x_col) {
    double v = sol.primal[col];
    if (v < -1e-5 || v > 1.0 + 1e-5)
      throw LpError("decoded fraction " + std::to_string(v) + " for " +
                    rel.lp.variables[col] + " is outside [0,1]");
    v = std::min(1.0, std::max(0.0, v));
    mass[key.item] += v;
    if (v > 0.0) frac.x[key] = v;
  }
  for (const auto& [item, total] : mass) {
    if (std::abs(total - 1.0) > 1e-5)
      throw LpError("assignment mass for " + to_string(item) + " is " +
                    std::to_string(total) + ", expected 1");
  }
  for (const auto& [key, col] : rel.completion_col)
    frac.completion[key] = sol.primal[col];
  return frac;
}

}  // namespace coflowhpn
