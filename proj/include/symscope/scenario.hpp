#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "symscope/anomaly.hpp"
#include "symscope/channels.hpp"
#include "symscope/cochain.hpp"
#include "symscope/common.hpp"
#include "symscope/diagnostics.hpp"
#include "symscope/report_io.hpp"

namespace symscope {

/// Scenario-level failures carry the file name and a JSON pointer to the
/// offending element; parse failures carry line and column.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void scenario_fail(const std::string& where,
                                       const std::string& message) {
  throw ScenarioError(where + ": " + message);
}

inline std::pair<int, int> line_and_column(const std::string& text,
                                           std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline const Json& member(const Json& j, const std::string& key,
                          const std::string& where) {
  if (!j.is_object())
    scenario_fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end())
    scenario_fail(where + "/" + key, "missing required field");
  return *it;
}

inline std::int64_t get_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer())
    scenario_fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

inline double get_double(const Json& j, const std::string& where) {
  if (!j.is_number())
    scenario_fail(where, "expected a number");
  return j.get<double>();
}

inline std::string get_string(const Json& j, const std::string& where) {
  if (!j.is_string())
    scenario_fail(where, "expected a string");
  return j.get<std::string>();
}

inline const Json& get_array(const Json& j, const std::string& where) {
  if (!j.is_array())
    scenario_fail(where, "expected an array");
  return j;
}

inline Matrix matrix_from_json(const Json& j, const std::string& where) {
  const Json& rows = get_array(j, where);
  std::int64_t n = static_cast<std::int64_t>(rows.size());
  if (n == 0) scenario_fail(where, "empty matrix");
  Matrix m(n, n);
  for (std::int64_t r = 0; r < n; ++r) {
    const Json& row = get_array(rows[r], where + "/" + std::to_string(r));
    if (static_cast<std::int64_t>(row.size()) != n)
      scenario_fail(where + "/" + std::to_string(r), "matrix must be square");
    for (std::int64_t c = 0; c < n; ++c) {
      const Json& cell = row[c];
      std::string cw =
          where + "/" + std::to_string(r) + "/" + std::to_string(c);
      if (cell.is_number()) {
        m(r, c) = Complex(cell.get<double>(), 0.0);
      } else if (cell.is_array() && cell.size() == 2) {
        m(r, c) = Complex(get_double(cell[0], cw), get_double(cell[1], cw));
      } else {
        scenario_fail(cw, "expected a number or [re, im] pair");
      }
    }
  }
  return m;
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::int64_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::int64_t c = 0; c < m.cols(); ++c)
      row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline DensityOperator seeded_random_state(const ChainGeometry& chain,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::int64_t d = chain.total_dim();
  Matrix a(d, d);
  for (std::int64_t r = 0; r < d; ++r)
    for (std::int64_t c = 0; c < d; ++c)
      a(r, c) = Complex(gauss(rng), gauss(rng));
  Matrix rho = a * a.adjoint();
  return DensityOperator(chain, rho / rho.trace().real());
}

}  // namespace detail

inline Json parse_scenario_text(const std::string& text,
                                const std::string& filename) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, col] = detail::line_and_column(text, e.byte > 0 ? e.byte - 1
                                                                : 0);
    throw ScenarioError(filename + ":" + std::to_string(line) + ":" +
                        std::to_string(col) + ": " + e.what());
  }
}

inline Json load_scenario_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f.good())
    throw ScenarioError("cannot open scenario file: " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_scenario_text(buf.str(), path.filename().string());
}

// ---------------------------------------------------------------------------
// Builders from JSON specs.

inline ChainGeometry chain_from_json(const Json& j, const std::string& where) {
  int sites = static_cast<int>(
      detail::get_int(detail::member(j, "sites", where), where + "/sites"));
  if (sites < 1) detail::scenario_fail(where + "/sites", "need at least one");
  int local_dim = 2;
  if (j.contains("local_dim"))
    local_dim = static_cast<int>(
        detail::get_int(j.at("local_dim"), where + "/local_dim"));
  try {
    return ChainGeometry::uniform(sites, local_dim);
  } catch (const std::exception& e) {
    detail::scenario_fail(where, e.what());
  }
}

inline DensityOperator state_from_json(const Json& j,
                                       const ChainGeometry& chain,
                                       std::uint64_t seed,
                                       const std::string& where) {
  std::string kind = detail::get_string(detail::member(j, "kind", where),
                                        where + "/kind");
  int n = chain.num_sites();
  auto need_qubits = [&] {
    if (!(chain == ChainGeometry::uniform(n)))
      detail::scenario_fail(where,
                            "state kind '" + kind +
                                "' requires a uniform qubit chain");
  };
  try {
    if (kind == "maximally_mixed") return maximally_mixed(chain);
    if (kind == "plus_product") {
      need_qubits();
      return plus_product(n).projector();
    }
    if (kind == "string_projected") {
      need_qubits();
      char axis = 'x';
      if (j.contains("axis"))
        axis = detail::get_string(j.at("axis"), where + "/axis").at(0);
      return string_projected(n, axis);
    }
    if (kind == "ghz_mixture") {
      need_qubits();
      return ghz_mixture(n);
    }
    if (kind == "paired_pm") {
      need_qubits();
      double p = detail::get_double(detail::member(j, "p", where),
                                    where + "/p");
      return paired_pm(n, p);
    }
    if (kind == "random") return detail::seeded_random_state(chain, seed);
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    detail::scenario_fail(where, e.what());
  }
  detail::scenario_fail(where + "/kind", "unknown state kind '" + kind + "'");
}

inline SymmetryAction action_from_json(const Json& j,
                                       const ChainGeometry& chain,
                                       const std::string& where) {
  std::string kind = detail::get_string(detail::member(j, "kind", where),
                                        where + "/kind");
  try {
    if (kind == "x_string") return x_string_action(chain);
    if (kind == "xz_string") return xz_string_action(chain);
  } catch (const std::exception& e) {
    detail::scenario_fail(where, e.what());
  }
  detail::scenario_fail(where + "/kind",
                        "unknown symmetry kind '" + kind + "'");
}

inline LocalOperator probe_from_json(const Json& j, const ChainGeometry& chain,
                                     const std::string& where) {
  int site = static_cast<int>(
      detail::get_int(detail::member(j, "site", where), where + "/site"));
  std::string pauli = detail::get_string(detail::member(j, "pauli", where),
                                         where + "/pauli");
  if (pauli.size() != 1 ||
      (pauli != "x" && pauli != "y" && pauli != "z"))
    detail::scenario_fail(where + "/pauli", "expected one of x, y, z");
  try {
    return pauli_at(chain, site, pauli[0]);
  } catch (const std::exception& e) {
    detail::scenario_fail(where, e.what());
  }
}

inline WindowSchedule schedule_from_json(const Json& j,
                                         const ChainGeometry& chain,
                                         const std::string& where) {
  std::string kind = detail::get_string(detail::member(j, "kind", where),
                                        where + "/kind");
  try {
    if (kind == "centered") return WindowSchedule::centered(chain);
    if (kind == "centered_proper") {
      int n = chain.num_sites();
      if (n < 2)
        detail::scenario_fail(where, "centered_proper needs >= 2 sites");
      std::vector<Region> w;
      int c = n / 2;
      for (int width = 1; width < n; width += 2) {
        int lo = c - width / 2;
        if (lo < 0 || lo + width > n) break;
        w.push_back(Region::range(lo, lo + width));
      }
      return WindowSchedule(std::move(w));
    }
    if (kind == "covering") {
      int seed_site = static_cast<int>(detail::get_int(
          detail::member(j, "seed_site", where), where + "/seed_site"));
      return WindowSchedule::covering(chain, Region::single(seed_site));
    }
    if (kind == "explicit") {
      const Json& regions = detail::get_array(
          detail::member(j, "regions", where), where + "/regions");
      std::vector<Region> w;
      for (std::size_t i = 0; i < regions.size(); ++i) {
        std::string rw = where + "/regions/" + std::to_string(i);
        const Json& r = detail::get_array(regions[i], rw);
        if (r.size() != 2)
          detail::scenario_fail(rw, "expected [first, past_end]");
        Region reg = Region::range(
            static_cast<int>(detail::get_int(r[0], rw)),
            static_cast<int>(detail::get_int(r[1], rw)));
        check_region_in_chain(chain, reg, "window");
        w.push_back(std::move(reg));
      }
      return WindowSchedule(std::move(w));
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    detail::scenario_fail(where, e.what());
  }
  detail::scenario_fail(where + "/kind", "unknown window kind '" + kind + "'");
}

inline Channel channel_from_json(const Json& j, const ChainGeometry& chain,
                                 std::uint64_t seed,
                                 const std::string& where) {
  std::string kind = detail::get_string(detail::member(j, "kind", where),
                                        where + "/kind");
  try {
    if (kind == "cluster_dephasing")
      return cluster_dephasing_channel(chain.num_sites());
    if (kind == "identity") return Channel::identity(chain);
    if (kind == "stinespring") {
      ChainGeometry bath = chain_from_json(
          detail::member(j, "bath", where), where + "/bath");
      DensityOperator bath_state = state_from_json(
          detail::member(j, "bath_state", where), bath, seed,
          where + "/bath_state");
      const Json& gates = detail::get_array(
          detail::member(j, "gates", where), where + "/gates");
      ChainGeometry joint = concat_geometry(chain, bath);
      std::vector<CircuitGate> parsed;
      for (std::size_t i = 0; i < gates.size(); ++i) {
        std::string gw = where + "/gates/" + std::to_string(i);
        std::string gkind = detail::get_string(
            detail::member(gates[i], "kind", gw), gw + "/kind");
        const Json& sj = detail::get_array(
            detail::member(gates[i], "sites", gw), gw + "/sites");
        std::vector<int> sites;
        for (const Json& s : sj)
          sites.push_back(static_cast<int>(detail::get_int(s, gw + "/sites")));
        if (gkind == "CZ") {
          if (sites.size() != 2)
            detail::scenario_fail(gw + "/sites", "CZ needs two sites");
          Matrix cz = Matrix::Identity(4, 4);
          cz(3, 3) = -1.0;
          parsed.push_back({Region(sites), std::move(cz)});
        } else if (gkind == "unitary") {
          Matrix m = detail::matrix_from_json(
              detail::member(gates[i], "matrix", gw), gw + "/matrix");
          parsed.push_back({Region(sites), std::move(m)});
        } else {
          detail::scenario_fail(gw + "/kind",
                                "unknown gate kind '" + gkind + "'");
        }
        check_region_in_chain(joint, parsed.back().sites, "channel gate");
      }
      return Channel::from_gates(chain, std::move(bath),
                                 std::move(bath_state), std::move(parsed));
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    detail::scenario_fail(where, e.what());
  }
  detail::scenario_fail(where + "/kind", "unknown channel kind '" + kind +
                                             "'");
}

inline GroupTable group_from_json(const Json& j, const std::string& where) {
  std::string kind = detail::get_string(detail::member(j, "kind", where),
                                        where + "/kind");
  try {
    if (kind == "cyclic")
      return GroupTable::cyclic(static_cast<int>(
          detail::get_int(detail::member(j, "n", where), where + "/n")));
    if (kind == "klein_four") return GroupTable::klein_four();
    if (kind == "product") {
      const Json& factors = detail::get_array(
          detail::member(j, "factors", where), where + "/factors");
      if (factors.size() < 2)
        detail::scenario_fail(where + "/factors", "need at least two factors");
      GroupTable g = GroupTable::cyclic(static_cast<int>(
          detail::get_int(factors[0], where + "/factors/0")));
      for (std::size_t i = 1; i < factors.size(); ++i)
        g = GroupTable::direct_product(
            g, GroupTable::cyclic(static_cast<int>(detail::get_int(
                   factors[i], where + "/factors/" + std::to_string(i)))));
      return g;
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    detail::scenario_fail(where, e.what());
  }
  detail::scenario_fail(where + "/kind", "unknown group kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Scenario: the validated cross-referenced bundle of ingredients.

struct Scenario {
  Json raw;
  std::string name;
  std::uint64_t seed;
  ChainGeometry chain;
  std::vector<std::pair<std::string, DensityOperator>> states;
  std::optional<SymmetryAction> action;
  std::vector<std::pair<std::string, LocalOperator>> probes;
  std::optional<WindowSchedule> schedule;
  std::vector<std::string> diagnostics;
  std::optional<Channel> channel;
};

inline const std::vector<std::string>& known_diagnostics() {
  static const std::vector<std::string> names = {
      "charge_coherence",       "strong_defect",
      "restriction_compare",    "clustering",
      "purification_clustering", "mutual_information"};
  return names;
}

inline Scenario parse_scenario(const Json& j, const std::string& filename,
                               std::optional<std::uint64_t> seed_override =
                                   std::nullopt) {
  const std::string root = filename;
  std::int64_t version = detail::get_int(
      detail::member(j, "schema_version", root), root + "/schema_version");
  if (version != 1)
    detail::scenario_fail(root + "/schema_version",
                          "unsupported schema_version " +
                              std::to_string(version));
  std::string name = detail::get_string(detail::member(j, "name", root),
                                        root + "/name");
  std::uint64_t seed = 0;
  if (j.contains("seed"))
    seed = static_cast<std::uint64_t>(
        detail::get_int(j.at("seed"), root + "/seed"));
  if (seed_override) seed = *seed_override;

  ChainGeometry chain =
      chain_from_json(detail::member(j, "chain", root), root + "/chain");

  std::vector<std::pair<std::string, DensityOperator>> states;
  if (j.contains("states")) {
    const Json& list = detail::get_array(j.at("states"), root + "/states");
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string where = root + "/states/" + std::to_string(i);
      std::string sname = detail::get_string(
          detail::member(list[i], "name", where), where + "/name");
      states.emplace_back(
          sname, state_from_json(list[i], chain, seed + i, where));
    }
  }

  std::optional<SymmetryAction> action;
  if (j.contains("symmetry"))
    action = action_from_json(j.at("symmetry"), chain, root + "/symmetry");

  std::vector<std::pair<std::string, LocalOperator>> probes;
  if (j.contains("probes")) {
    const Json& list = detail::get_array(j.at("probes"), root + "/probes");
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string where = root + "/probes/" + std::to_string(i);
      LocalOperator op = probe_from_json(list[i], chain, where);
      std::string pname =
          detail::get_string(detail::member(list[i], "pauli", where),
                             where + "/pauli") +
          std::to_string(op.support().sites().front());
      probes.emplace_back(std::move(pname), std::move(op));
    }
  }

  std::optional<WindowSchedule> schedule;
  if (j.contains("windows"))
    schedule = schedule_from_json(j.at("windows"), chain, root + "/windows");

  std::vector<std::string> diagnostics;
  if (j.contains("diagnostics")) {
    const Json& list =
        detail::get_array(j.at("diagnostics"), root + "/diagnostics");
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string where = root + "/diagnostics/" + std::to_string(i);
      std::string d = detail::get_string(list[i], where);
      bool known = false;
      for (const std::string& k : known_diagnostics()) known |= (k == d);
      if (!known)
        detail::scenario_fail(where, "unknown diagnostic '" + d + "'");
      diagnostics.push_back(std::move(d));
    }
  }

  std::optional<Channel> channel;
  if (j.contains("channel"))
    channel =
        channel_from_json(j.at("channel"), chain, seed, root + "/channel");

  // Cross-reference validation for the selected diagnostics.
  auto need = [&](bool ok, const std::string& what,
                  const std::string& diag) {
    if (!ok)
      detail::scenario_fail(root + "/diagnostics",
                            "'" + diag + "' requires " + what);
  };
  for (const std::string& d : diagnostics) {
    if (d == "charge_coherence") {
      need(action.has_value(), "a symmetry", d);
      need(!probes.empty(), "at least one probe", d);
      need(schedule.has_value(), "windows", d);
    } else if (d == "strong_defect") {
      need(action.has_value(), "a symmetry", d);
    } else if (d == "restriction_compare") {
      need(states.size() >= 2, "at least two states", d);
      need(schedule.has_value(), "windows", d);
    } else if (d == "clustering" || d == "purification_clustering") {
      need(!probes.empty(), "at least one probe", d);
    }
    if (d != "restriction_compare") need(!states.empty(), "a state", d);
  }

  return Scenario{j,
                  std::move(name),
                  seed,
                  std::move(chain),
                  std::move(states),
                  std::move(action),
                  std::move(probes),
                  std::move(schedule),
                  std::move(diagnostics),
                  std::move(channel)};
}

// ---------------------------------------------------------------------------
// Execution.

struct RunResult {
  Json bundle;
  std::string csv;
  bool any_inconclusive = false;
};

namespace detail {

struct ScenarioJob {
  std::string id;
  std::function<Json()> work;
};

/// Runs jobs on up to `jobs` workers; results and errors are merged in job
/// order, so the output is independent of scheduling.
inline std::vector<Json> run_jobs(const std::vector<ScenarioJob>& jobs,
                                  int workers) {
  std::vector<Json> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, static_cast<int>(jobs.size()) > 0
                                       ? static_cast<int>(jobs.size())
                                       : 1);
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i].work();
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = jobs[i].work();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
  return results;
}

inline std::vector<int> clustering_distances(const ChainGeometry& chain,
                                             const LocalOperator& moving) {
  int last = moving.support().sites().back();
  std::vector<int> distances;
  for (int d = 1; last + d < chain.num_sites(); ++d) distances.push_back(d);
  if (distances.empty())
    scenario_fail("probes", "no room to translate the clustering probe");
  return distances;
}

inline Json chain_to_json(const ChainGeometry& chain) {
  Json j;
  j["sites"] = chain.num_sites();
  j["local_dim"] = chain.local_dim(0);
  return j;
}

}  // namespace detail

inline RunResult run_scenario(const Scenario& s, int jobs = 1) {
  std::vector<detail::ScenarioJob> list;

  // Closures run after the construction loops finish (possibly on worker
  // threads), so they capture the Scenario by reference plus stable pointers
  // into its vectors -- never loop-iteration bindings.
  const Scenario* sc = &s;
  for (const std::string& d : s.diagnostics) {
    if (d == "restriction_compare") {
      const auto* first = &s.states[0];
      const auto* second = &s.states[1];
      std::string id = first->first + "~" + second->first + "/" + d;
      list.push_back({id, [sc, first, second, id] {
        Json rep;
        rep["id"] = id;
        rep["diagnostic"] = "restriction_compare";
        rep["states"] = Json::array({first->first, second->first});
        std::vector<int> widths;
        std::vector<double> values;
        for (const Region& w : sc->schedule->windows()) {
          widths.push_back(w.size());
          values.push_back(trace_distance(restrict_state(first->second, w),
                                          restrict_state(second->second, w)));
        }
        rep["windows"] = widths;
        rep["values"] = values;
        return rep;
      }});
      continue;
    }
    for (const auto& entry : s.states) {
      const std::string& sname = entry.first;
      const DensityOperator* st = &entry.second;
      if (d == "charge_coherence") {
        for (const auto& pentry : s.probes) {
          const std::string& pname = pentry.first;
          const LocalOperator* pr = &pentry.second;
          std::string id = sname + "/" + d + "/" + pname;
          list.push_back({id, [sc, st, pr, id, sname, pname] {
            DiagnosticReport rep = charge_coherence_scan(
                *st, *pr, *sc->schedule, &*sc->action);
            Json out;
            out["id"] = id;
            out["state"] = sname;
            out["probe"] = pname;
            out.update(report_to_json(rep));
            return out;
          }});
        }
      } else if (d == "strong_defect") {
        std::string id = sname + "/" + d;
        list.push_back({id, [sc, st, id, sname] {
          double strong = strong_symmetry_defect_finite(*st, *sc->action);
          double weak = 0.0;
          for (int g = 0; g < sc->action->group().order(); ++g) {
            if (g == sc->action->group().identity()) continue;
            weak = std::max(weak, weak_symmetry_defect(*st, *sc->action, g));
          }
          Json j;
          j["id"] = id;
          j["state"] = sname;
          j["diagnostic"] = "strong_defect";
          j["strong_defect"] = strong;
          j["weak_defect"] = weak;
          j["finite_size"] = strong <= 1e-8 ? "STRONG" : "NOT-STRONG";
          return j;
        }});
      } else if (d == "clustering") {
        std::string id = sname + "/" + d;
        list.push_back({id, [sc, st, id, sname] {
          const LocalOperator& a = sc->probes[0].second;
          const LocalOperator& b = sc->probes.size() > 1
                                       ? sc->probes[1].second
                                       : sc->probes[0].second;
          DiagnosticReport rep = clustering_scan(
              *st, a, b, detail::clustering_distances(sc->chain, b));
          Json out;
          out["id"] = id;
          out["state"] = sname;
          out.update(report_to_json(rep));
          return out;
        }});
      } else if (d == "purification_clustering") {
        std::string id = sname + "/" + d;
        list.push_back({id, [sc, st, id, sname] {
          const LocalOperator& a = sc->probes[0].second;
          DiagnosticReport rep = purification_clustering_scan(
              *st, a, detail::clustering_distances(sc->chain, a));
          Json out;
          out["id"] = id;
          out["state"] = sname;
          out.update(report_to_json(rep));
          return out;
        }});
      } else if (d == "mutual_information") {
        std::string id = sname + "/" + d;
        list.push_back({id, [sc, st, id, sname] {
          Json j;
          j["id"] = id;
          j["state"] = sname;
          j["diagnostic"] = "mutual_information";
          std::vector<int> cuts;
          std::vector<double> nats, bits;
          for (int c = 1; c < sc->chain.num_sites(); ++c) {
            MutualInformationValue v =
                mutual_information(*st, Region::range(0, c));
            cuts.push_back(c);
            nats.push_back(v.value);
            bits.push_back(v.value_log2);
          }
          j["windows"] = cuts;
          j["values"] = nats;
          j["values_log2"] = bits;
          return j;
        }});
      }
    }
  }

  std::vector<Json> reports = detail::run_jobs(list, jobs);

  RunResult out;
  out.bundle["schema_version"] = 1;
  out.bundle["name"] = s.name;
  out.bundle["seed"] = s.seed;
  out.bundle["chain"] = detail::chain_to_json(s.chain);
  out.bundle["reports"] = reports;
  int inconclusive = 0;
  out.csv = "report,window,value\n";
  for (const Json& r : reports) {
    if (r.contains("verdict") && r.at("verdict") == "INCONCLUSIVE")
      ++inconclusive;
    if (r.contains("windows") && r.contains("values")) {
      append_report_csv(out.csv, r.at("id").get<std::string>(),
                        r.at("windows").get<std::vector<int>>(),
                        r.at("values").get<std::vector<double>>());
    }
  }
  out.bundle["summary"] = Json{{"reports", reports.size()},
                               {"inconclusive", inconclusive}};
  out.any_inconclusive = inconclusive > 0;
  return out;
}

/// Re-runs one scenario recipe at a list of increasing sizes, evaluating the
/// first charge-coherence probe on a fixed window; emits size vs value.
inline RunResult sweep_sizes(const Json& j, const std::string& filename,
                             std::optional<std::uint64_t> seed_override =
                                 std::nullopt,
                             int jobs = 1) {
  const std::string root = filename;
  Scenario base = parse_scenario(j, filename, seed_override);
  const Json& sweep = detail::member(j, "sweep", root);
  const std::string sw = root + "/sweep";
  const Json& sizes_json =
      detail::get_array(detail::member(sweep, "sizes", sw), sw + "/sizes");
  std::vector<int> sizes;
  for (std::size_t i = 0; i < sizes_json.size(); ++i) {
    sizes.push_back(static_cast<int>(
        detail::get_int(sizes_json[i], sw + "/sizes/" + std::to_string(i))));
    if (i > 0 && sizes[i] <= sizes[i - 1])
      detail::scenario_fail(sw + "/sizes", "sizes must be increasing");
  }
  if (sizes.empty()) detail::scenario_fail(sw + "/sizes", "no sizes");
  const Json& window_json =
      detail::get_array(detail::member(sweep, "window", sw), sw + "/window");
  if (window_json.size() != 2)
    detail::scenario_fail(sw + "/window", "expected [first, past_end]");
  int wlo = static_cast<int>(detail::get_int(window_json[0], sw + "/window"));
  int whi = static_cast<int>(detail::get_int(window_json[1], sw + "/window"));

  if (base.states.empty())
    detail::scenario_fail(root + "/states", "sweep needs a state recipe");
  if (!base.action)
    detail::scenario_fail(root + "/symmetry", "sweep needs a symmetry");
  if (base.probes.empty())
    detail::scenario_fail(root + "/probes", "sweep needs a probe");
  const Json& state_spec = j.at("states").at(0);
  const Json& probe_spec = j.at("probes").at(0);
  const Json& symmetry_spec = j.at("symmetry");

  std::vector<detail::ScenarioJob> list;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    int n = sizes[i];
    std::string id = "N=" + std::to_string(n);
    list.push_back({id, [&, n, id] {
      ChainGeometry chain = [&] {
        try {
          return ChainGeometry::uniform(n, base.chain.local_dim(0));
        } catch (const std::exception& e) {
          detail::scenario_fail(sw + "/sizes", e.what());
        }
      }();
      Region window = Region::range(wlo, whi);
      check_region_in_chain(chain, window, "sweep window");
      DensityOperator state = state_from_json(state_spec, chain, base.seed,
                                              root + "/states/0");
      SymmetryAction action =
          action_from_json(symmetry_spec, chain, root + "/symmetry");
      LocalOperator probe =
          probe_from_json(probe_spec, chain, root + "/probes/0");
      DiagnosticReport rep = charge_coherence_scan(
          state, probe, WindowSchedule({window}), &action);
      Json out;
      out["id"] = id;
      out["size"] = n;
      out["value"] = rep.values.at(0);
      return out;
    }});
  }
  std::vector<Json> rows = detail::run_jobs(list, jobs);

  RunResult out;
  out.bundle["schema_version"] = 1;
  out.bundle["name"] = base.name;
  out.bundle["seed"] = base.seed;
  out.bundle["sweep"] = Json{{"window", Json::array({wlo, whi})},
                             {"rows", rows}};
  out.csv = "size,value\n";
  for (const Json& r : rows) {
    out.csv += std::to_string(r.at("size").get<int>());
    out.csv += ',';
    out.csv += detail::format_float(r.at("value").get<double>());
    out.csv += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cohomology / anomaly / channel runners for the dedicated subcommands.

inline Json cochain_to_json(const Cochain& w) {
  Json entries = Json::array();
  int m = w.group().order();
  std::vector<int> args(static_cast<std::size_t>(w.degree()), 0);
  // Odometer over group tuples in lexicographic order, last index fastest.
  while (true) {
    Phase p = w.at(args);
    Json e;
    e["args"] = args;
    e["num"] = p.num();
    e["den"] = p.den();
    entries.push_back(std::move(e));
    int i = w.degree() - 1;
    for (; i >= 0; --i) {
      if (++args[static_cast<std::size_t>(i)] < m) break;
      args[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return entries;
}

inline RunResult run_cohomology_scenario(const Json& j,
                                         const std::string& filename,
                                         std::optional<std::uint64_t>
                                             seed_override = std::nullopt) {
  const std::string root = filename;
  const Json& section = detail::member(j, "cohomology", root);
  const std::string cw = root + "/cohomology";
  GroupTable group =
      group_from_json(detail::member(section, "group", cw), cw + "/group");
  std::string check = detail::get_string(
      detail::member(section, "check", cw), cw + "/check");
  std::uint64_t seed = 0;
  if (j.contains("seed"))
    seed = static_cast<std::uint64_t>(
        detail::get_int(j.at("seed"), root + "/seed"));
  if (seed_override) seed = *seed_override;

  RunResult out;
  out.bundle["schema_version"] = 1;
  out.bundle["name"] = detail::get_string(detail::member(j, "name", root),
                                          root + "/name");
  out.bundle["seed"] = seed;
  out.bundle["group_order"] = group.order();
  out.bundle["check"] = check;

  if (check == "pauli_projective") {
    if (group.order() != 4)
      detail::scenario_fail(cw + "/group",
                            "pauli_projective expects the Klein four-group");
    Matrix y(2, 2);  // the real-squaring companion of XZ
    y << Complex(0, 0), Complex(0, 1), Complex(0, -1), Complex(0, 0);
    std::vector<Matrix> rep = {Matrix::Identity(2, 2), pauli_x(), pauli_z(),
                               y};
    Cochain w = projective_2cocycle(group, rep);
    TrivializationResult t = trivialize(w);
    out.bundle["class_trivial"] = t.trivial;
    out.bundle["cocycle"] = cochain_to_json(w);
    out.any_inconclusive = false;
    return out;
  }
  if (check == "random_coboundary") {
    int degree = 2;
    if (section.contains("degree"))
      degree = static_cast<int>(
          detail::get_int(section.at("degree"), cw + "/degree"));
    if (degree < 2 || degree > 3)
      detail::scenario_fail(cw + "/degree",
                            "random_coboundary supports degrees 2..3");
    int trials = 5;
    if (section.contains("trials"))
      trials = static_cast<int>(
          detail::get_int(section.at("trials"), cw + "/trials"));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dyadic(0, 7);
    int trivially_classified = 0;
    for (int t = 0; t < trials; ++t) {
      std::size_t cells = 1;
      for (int i = 0; i + 1 < degree; ++i)
        cells *= static_cast<std::size_t>(group.order());
      std::vector<Phase> values(cells);
      for (Phase& p : values) p = Phase::of(dyadic(rng), 8);
      Cochain eta = Cochain::from_values(group, degree - 1, values);
      Cochain w = coboundary(eta);
      TrivializationResult res = trivialize(w);
      if (res.trivial && res.witness &&
          coboundary(*res.witness) == w)
        ++trivially_classified;
    }
    out.bundle["degree"] = degree;
    out.bundle["trials"] = trials;
    out.bundle["all_trivial_with_witness"] = trivially_classified == trials;
    return out;
  }
  if (check == "d_squared") {
    int degree = 2;
    if (section.contains("degree"))
      degree = static_cast<int>(
          detail::get_int(section.at("degree"), cw + "/degree"));
    if (degree < 1 || degree > 3)
      detail::scenario_fail(cw + "/degree", "d_squared supports degrees 1..3");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dyadic(0, 7);
    std::size_t cells = 1;
    for (int i = 0; i < degree; ++i)
      cells *= static_cast<std::size_t>(group.order());
    bool ok = true;
    for (int t = 0; t < 5; ++t) {
      std::vector<Phase> values(cells);
      for (Phase& p : values) p = Phase::of(dyadic(rng), 8);
      Cochain w = Cochain::from_values(group, degree, values);
      ok = ok && coboundary(coboundary(w)).is_zero();
    }
    out.bundle["degree"] = degree;
    out.bundle["d_squared_zero"] = ok;
    return out;
  }
  detail::scenario_fail(cw + "/check", "unknown check '" + check + "'");
}

inline RunResult run_anomaly_scenario(const Json& j,
                                      const std::string& filename) {
  const std::string root = filename;
  Scenario base = parse_scenario(j, filename);
  if (!base.action)
    detail::scenario_fail(root + "/symmetry", "anomaly needs a symmetry");
  const Json& section = detail::member(j, "anomaly", root);
  const std::string aw = root + "/anomaly";
  int cut = static_cast<int>(
      detail::get_int(detail::member(section, "cut", aw), aw + "/cut"));
  int slack = 0;
  if (section.contains("window_slack"))
    slack = static_cast<int>(
        detail::get_int(section.at("window_slack"), aw + "/window_slack"));

  RunResult out;
  out.bundle["schema_version"] = 1;
  out.bundle["name"] = base.name;
  out.bundle["cut"] = cut;
  try {
    HalfChainAction half(*base.action, cut, slack);
    BoundaryCocycleData data = boundary_cocycle_data(half);
    if (section.contains("v_data")) {
      const Json& vd = section.at("v_data");
      const Json& rows = detail::get_array(
          detail::member(vd, "v", aw + "/v_data"), aw + "/v_data/v");
      int m = base.action->group().order();
      if (static_cast<int>(rows.size()) != m)
        detail::scenario_fail(aw + "/v_data/v", "need one row per element");
      for (int g = 0; g < m; ++g) {
        const Json& row = detail::get_array(
            rows[g], aw + "/v_data/v/" + std::to_string(g));
        if (static_cast<int>(row.size()) != m)
          detail::scenario_fail(aw + "/v_data/v", "need a full matrix table");
        for (int h = 0; h < m; ++h)
          data.v[static_cast<std::size_t>(g)][static_cast<std::size_t>(h)] =
              detail::matrix_from_json(row[h], aw + "/v_data/v/" +
                                                   std::to_string(g) + "/" +
                                                   std::to_string(h));
      }
    }
    Cochain w = anomaly_3cocycle(data, half);
    TrivializationResult t = trivialize(w);
    out.bundle["class_trivial"] = t.trivial;
    out.bundle["cocycle"] = cochain_to_json(w);
    out.bundle["residuals"] =
        Json{{"boundary_relation", data.max_residual}};
    Json vexp = Json::array();
    for (const auto& row : data.v) {
      Json vrow = Json::array();
      for (const Matrix& m2 : row) vrow.push_back(detail::matrix_to_json(m2));
      vexp.push_back(std::move(vrow));
    }
    out.bundle["v_data"] =
        Json{{"window_dim", data.window.empty()
                                ? 0
                                : static_cast<int>(data.v[0][0].rows())},
             {"v", std::move(vexp)}};
  } catch (const std::exception& e) {
    throw ScenarioError(aw + ": " + e.what());
  }
  return out;
}

inline RunResult run_channel_scenario(const Json& j,
                                      const std::string& filename,
                                      std::optional<std::uint64_t>
                                          seed_override = std::nullopt,
                                      int jobs = 1) {
  (void)jobs;
  const std::string root = filename;
  Scenario s = parse_scenario(j, filename, seed_override);
  if (!s.channel)
    detail::scenario_fail(root + "/channel", "channel scenario needs one");
  if (!s.action)
    detail::scenario_fail(root + "/symmetry", "channel scenario needs one");
  if (s.states.empty())
    detail::scenario_fail(root + "/states", "channel scenario needs a state");

  RunResult out;
  out.bundle["schema_version"] = 1;
  out.bundle["name"] = s.name;
  out.bundle["seed"] = s.seed;

  ChannelSymmetryReport sym = is_strongly_symmetric_channel(*s.channel,
                                                            *s.action);
  out.bundle["strongly_symmetric"] = sym.strongly_symmetric;
  out.bundle["defect"] = sym.defect;

  const DensityOperator& input = s.states[0].second;
  DensityOperator output = apply_channel(*s.channel, input);
  Json odiag;
  odiag["strong_defect"] = strong_symmetry_defect_finite(output, *s.action);
  double weak = 0.0;
  for (int g = 0; g < s.action->group().order(); ++g) {
    if (g == s.action->group().identity()) continue;
    weak = std::max(weak, weak_symmetry_defect(output, *s.action, g));
  }
  odiag["weak_defect"] = weak;
  out.bundle["output"] = std::move(odiag);
  out.csv = "report,window,value\n";

  bool want_experiment =
      j.contains("experiment") &&
      j.at("experiment").is_object();
  if (want_experiment) {
    const Json& ex = j.at("experiment");
    const std::string ew = root + "/experiment";
    if (!s.schedule || s.probes.empty())
      detail::scenario_fail(ew, "experiment needs probes and windows");
    std::optional<PureStateVector> witness;
    if (ex.contains("witness")) {
      std::string wk = detail::get_string(ex.at("witness"), ew + "/witness");
      if (wk == "cluster_extension")
        witness = cluster_extension_state(s.chain.num_sites());
      else
        detail::scenario_fail(ew + "/witness",
                              "unknown witness '" + wk + "'");
    }
    Json exj;
    if (!sym.strongly_symmetric) {
      exj["error"] = "channel is not strongly symmetric";
    } else {
      try {
        IrreversibilityReport rep = irreversibility_experiment(
            input, *s.channel, *s.action, s.probes[0].second, *s.schedule,
            witness ? &*witness : nullptr);
        exj["joint_strong_defect"] = rep.joint_strong_defect;
        exj["retained_witness_defect"] = rep.retained_witness_defect;
        if (rep.supplied_witness_defect)
          exj["supplied_witness_defect"] = *rep.supplied_witness_defect;
        exj["preservation_verdict"] = rep.preservation_verdict;
        exj["coherence"] = report_to_json(rep.coherence);
        append_report_csv(out.csv, "experiment/charge_coherence",
                          rep.coherence.windows, rep.coherence.values);
        if (rep.coherence.verdict == "INCONCLUSIVE")
          out.any_inconclusive = true;
      } catch (const std::exception& e) {
        throw ScenarioError(ew + ": " + e.what());
      }
    }
    out.bundle["experiment"] = std::move(exj);
  }

  if (!s.probes.empty()) {
    DiagnosticReport purif = purification_clustering_scan(
        output, s.probes[0].second,
        detail::clustering_distances(s.chain, s.probes[0].second));
    out.bundle["purification"] = report_to_json(purif);
    append_report_csv(out.csv, "output/purification_clustering",
                      purif.windows, purif.values);
    if (purif.verdict == "INCONCLUSIVE") out.any_inconclusive = true;
  }
  return out;
}

}  // namespace symscope
