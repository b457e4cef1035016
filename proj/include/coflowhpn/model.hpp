#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace coflowhpn {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One network core: an N x N non-blocking switch whose links all run at
/// `speed` data units per time unit.
struct Core {
  int id = 0;
  double speed = 1.0;
};

struct Flow {
  int src = 0;  // input port, 1-based
  int dst = 0;  // output port, 1-based
  double size = 0.0;
};

/// Identifies a flow (src, dst, coflow). Coflow-granularity code reuses the
/// same key with src = dst = 0, so one ordered key type covers both item
/// kinds throughout the scheduling pipeline.
struct FlowKey {
  int src = 0;
  int dst = 0;
  int coflow = 0;

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

inline FlowKey coflow_key(int coflow_id) { return FlowKey{0, 0, coflow_id}; }

/// Whether a coflow's flows must share one core (indivisible) or may spread
/// over several (divisible).
enum class Mode { indivisible, divisible };

inline std::string to_string(const FlowKey& k) {
  std::ostringstream os;
  if (k.src == 0 && k.dst == 0) {
    os << "coflow " << k.coflow;
  } else {
    os << "(" << k.src << "," << k.dst << "," << k.coflow << ")";
  }
  return os.str();
}

/// A coflow: a weighted, released set of flows whose completion time is that
/// of its last finishing flow. Demand is kept sparse; flows are sorted by
/// (src, dst) and sizes are strictly positive.
struct Coflow {
  int id = 0;
  double weight = 1.0;
  double release = 0.0;
  std::vector<Flow> flows;

  double total_demand() const {
    double sum = 0.0;
    for (const Flow& fl : flows) sum += fl.size;
    return sum;
  }
};

/// An instance of the heterogeneous-parallel-network coflow problem:
/// `num_ports` input and output ports, m cores with per-core link speeds,
/// and n coflows. Immutable after construction/validation; safe to share
/// read-only across threads.
struct CoflowInstance {
  int num_ports = 0;
  std::vector<Core> cores;      // sorted by id
  std::vector<Coflow> coflows;  // sorted by id

  int core_count() const { return static_cast<int>(cores.size()); }
  int coflow_count() const { return static_cast<int>(coflows.size()); }

  int flow_count() const {
    int n = 0;
    for (const Coflow& c : coflows) n += static_cast<int>(c.flows.size());
    return n;
  }

  double max_speed() const {
    double s = 0.0;
    for (const Core& c : cores) s = std::max(s, c.speed);
    return s;
  }

  double min_speed() const {
    double s = std::numeric_limits<double>::infinity();
    for (const Core& c : cores) s = std::min(s, c.speed);
    return s;
  }

  const Coflow& coflow_by_id(int id) const {
    for (const Coflow& c : coflows)
      if (c.id == id) return c;
    throw ValidationError("unknown coflow id " + std::to_string(id));
  }

  const Core& core_by_id(int id) const {
    for (const Core& c : cores)
      if (c.id == id) return c;
    throw ValidationError("unknown core id " + std::to_string(id));
  }

  void validate() const {
    if (num_ports < 1) throw ValidationError("num_ports must be >= 1");
    if (cores.empty()) throw ValidationError("instance has no cores");
    if (coflows.empty()) throw ValidationError("instance has no coflows");
    for (std::size_t k = 0; k + 1 < cores.size(); ++k) {
      if (cores[k].id >= cores[k + 1].id)
        throw ValidationError("cores not sorted by unique id near core " +
                              std::to_string(cores[k].id));
    }
    for (const Core& c : cores) {
      if (!(c.speed > 0.0) || !std::isfinite(c.speed))
        throw ValidationError("core " + std::to_string(c.id) +
                              ": non-positive speed");
    }
    for (std::size_t f = 0; f + 1 < coflows.size(); ++f) {
      if (coflows[f].id >= coflows[f + 1].id)
        throw ValidationError("coflows not sorted by unique id near coflow " +
                              std::to_string(coflows[f].id));
    }
    for (const Coflow& c : coflows) {
      const std::string who = "coflow " + std::to_string(c.id);
      if (!(c.weight > 0.0) || !std::isfinite(c.weight))
        throw ValidationError(who + ": non-positive weight");
      if (c.release < 0.0 || !std::isfinite(c.release))
        throw ValidationError(who + ": negative release time");
      if (c.flows.empty()) throw ValidationError(who + ": no flows");
      for (std::size_t q = 0; q < c.flows.size(); ++q) {
        const Flow& fl = c.flows[q];
        const std::string where = who + ": flow (" + std::to_string(fl.src) +
                                  "," + std::to_string(fl.dst) + ")";
        if (fl.src < 1 || fl.src > num_ports || fl.dst < 1 ||
            fl.dst > num_ports)
          throw ValidationError(where + " port index out of range [1," +
                                std::to_string(num_ports) + "]");
        if (!(fl.size > 0.0) || !std::isfinite(fl.size))
          throw ValidationError(where + " zero-size flow");
        if (q > 0) {
          const Flow& prev = c.flows[q - 1];
          if (std::pair{prev.src, prev.dst} >= std::pair{fl.src, fl.dst})
            throw ValidationError(where + " duplicate or unsorted flow");
        }
      }
    }
  }
};

/// Per-(port, coflow) load aggregates: input(i, f) = sum_j d_ijf and
/// output(j, f) = sum_i d_ijf. Indexed by coflow position within the
/// instance, ports 1-based.
struct PortLoads {
  int num_ports = 0;
  std::vector<std::vector<double>> in;   // [coflow pos][i - 1]
  std::vector<std::vector<double>> out;  // [coflow pos][j - 1]

  double input(int coflow_pos, int port) const {
    return in[coflow_pos][port - 1];
  }
  double output(int coflow_pos, int port) const {
    return out[coflow_pos][port - 1];
  }

  /// Largest single-port load of the coflow (its transfer bottleneck).
  double bottleneck(int coflow_pos) const {
    double b = 0.0;
    for (double v : in[coflow_pos]) b = std::max(b, v);
    for (double v : out[coflow_pos]) b = std::max(b, v);
    return b;
  }
};

inline PortLoads port_loads(const CoflowInstance& inst) {
  PortLoads loads;
  loads.num_ports = inst.num_ports;
  loads.in.assign(inst.coflows.size(), std::vector<double>(inst.num_ports, 0.0));
  loads.out.assign(inst.coflows.size(), std::vector<double>(inst.num_ports, 0.0));
  for (std::size_t f = 0; f < inst.coflows.size(); ++f) {
    for (const Flow& fl : inst.coflows[f].flows) {
      loads.in[f][fl.src - 1] += fl.size;
      loads.out[f][fl.dst - 1] += fl.size;
    }
  }
  return loads;
}

// ---- instance file format (coflow-hpn/1) ----------------------------------

inline constexpr const char* kInstanceFormat = "coflow-hpn/1";

inline CoflowInstance instance_from_json(const nlohmann::json& j) {
  CoflowInstance inst;
  try {
    if (!j.contains("format") || j.at("format").get<std::string>() != kInstanceFormat)
      throw ParseError(std::string("missing or unsupported format field, expected \"") +
                       kInstanceFormat + "\"");
    inst.num_ports = j.at("num_ports").get<int>();
    for (const auto& jc : j.at("cores")) {
      Core c;
      c.id = jc.at("id").get<int>();
      c.speed = jc.at("speed").get<double>();
      inst.cores.push_back(c);
    }
    for (const auto& jf : j.at("coflows")) {
      Coflow c;
      c.id = jf.at("id").get<int>();
      c.weight = jf.at("weight").get<double>();
      c.release = jf.at("release").get<double>();
      for (const auto& jfl : jf.at("flows")) {
        Flow fl;
        fl.src = jfl.at("src").get<int>();
        fl.dst = jfl.at("dst").get<int>();
        fl.size = jfl.at("size").get<double>();
        c.flows.push_back(fl);
      }
      inst.coflows.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance: ") + e.what());
  }
  // Normalize order, then validate (validation relies on sortedness).
  std::sort(inst.cores.begin(), inst.cores.end(),
            [](const Core& a, const Core& b) { return a.id < b.id; });
  std::sort(inst.coflows.begin(), inst.coflows.end(),
            [](const Coflow& a, const Coflow& b) { return a.id < b.id; });
  for (Coflow& c : inst.coflows) {
    std::sort(c.flows.begin(), c.flows.end(), [](const Flow& a, const Flow& b) {
      return std::pair{a.src, a.dst} < std::pair{b.src, b.dst};
    });
  }
  inst.validate();
  return inst;
}

inline CoflowInstance load_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance is not valid JSON: ") + e.what());
  }
  return instance_from_json(j);
}

inline CoflowInstance load_instance(std::istream& is) {
  std::ostringstream buf;
  buf << is.rdbuf();
  return load_instance(buf.str());
}

inline nlohmann::json instance_to_json(const CoflowInstance& inst) {
  nlohmann::json j;
  j["format"] = kInstanceFormat;
  j["num_ports"] = inst.num_ports;
  j["cores"] = nlohmann::json::array();
  for (const Core& c : inst.cores)
    j["cores"].push_back({{"id", c.id}, {"speed", c.speed}});
  j["coflows"] = nlohmann::json::array();
  for (const Coflow& c : inst.coflows) {
    nlohmann::json jf = {{"id", c.id},
                         {"weight", c.weight},
                         {"release", c.release},
                         {"flows", nlohmann::json::array()}};
    for (const Flow& fl : c.flows)
      jf["flows"].push_back({{"src", fl.src}, {"dst", fl.dst}, {"size", fl.size}});
    j["coflows"].push_back(std::move(jf));
  }
  return j;
}

/// Canonical serialization: cores and coflows by id, flows by (src, dst),
/// keys alphabetical. load_instance(save_instance(x)) == x, and saving a
/// loaded canonical file reproduces it byte for byte.
inline std::string save_instance(const CoflowInstance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

/// Smallest power-of-two factor c >= 1 such that after multiplying all sizes
/// by c, every flow's transfer time on the fastest core is at least one time
/// unit. c == 1 means the instance already satisfies the unit-transfer-time
/// assumption the interval-indexed relaxations rest on; larger c flags an
/// instance the TWCT pipeline must rescale first.
inline double unit_time_scale(const CoflowInstance& inst) {
  const double s_max = inst.max_speed();
  double min_transfer = std::numeric_limits<double>::infinity();
  for (const Coflow& c : inst.coflows)
    for (const Flow& fl : c.flows)
      min_transfer = std::min(min_transfer, fl.size / s_max);
  double c = 1.0;
  while (c * min_transfer < 1.0 - 1e-12) c *= 2.0;
  return c;
}

/// Multiplies all sizes and release times by `factor`; the scaled problem is
/// the original with the time unit shrunk by `factor`, so completion times
/// map back via division.
inline CoflowInstance scale_instance(const CoflowInstance& inst, double factor) {
  CoflowInstance scaled = inst;
  for (Coflow& c : scaled.coflows) {
    c.release *= factor;
    for (Flow& fl : c.flows) fl.size *= factor;
  }
  return scaled;
}

}  // namespace coflowhpn
