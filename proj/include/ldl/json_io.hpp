#pragma once

#include <string>

#include "json.hpp"
#include "ldl/congest.hpp"
#include "ldl/exact.hpp"
#include "ldl/graph.hpp"
#include "ldl/orientation.hpp"
#include "ldl/report.hpp"
#include "ldl/sim.hpp"

namespace ldl {

using Json = nlohmann::ordered_json;

inline Json rational_json(const Rational& r) {
  Json j;
  j["str"] = r.str();
  j["value"] = r.to_double();
  return j;
}

inline Json u128_json(unsigned __int128 v) {
  if (v <= static_cast<unsigned __int128>(
               std::numeric_limits<std::uint64_t>::max()))
    return Json(static_cast<std::uint64_t>(v));
  return Json(u128_str(v));
}

inline Json graph_json(const Graph& g) {
  Json j;
  j["n"] = g.n();
  Json edges = Json::array();
  for (const Graph::Edge& e : g.edges())
    edges.push_back({e.u, e.v, e.weight.to_double()});
  j["edges"] = std::move(edges);
  return j;
}

inline Json trace_json(const Trace& t) {
  Json j;
  j["rounds"] = t.rounds;
  Json abs = Json::array();
  for (const AbstractCharge& c : t.abstract_rounds)
    abs.push_back({{"label", c.label}, {"rounds", u128_json(c.rounds)}});
  j["abstract_rounds"] = std::move(abs);
  j["total_rounds"] = u128_json(t.total_rounds());
  Json bits = Json::array();
  for (auto& [round, b] : t.round_bits) bits.push_back({round, b});
  j["max_bits_per_round"] = std::move(bits);
  j["max_bits"] = t.max_bits;
  Json outputs = Json::object();
  for (auto& [v, text] : t.outputs) outputs[std::to_string(v)] = text;
  j["outputs"] = std::move(outputs);
  j["violations"] = t.violations;
  return j;
}

inline Json duality_json(const DualityReport& r) {
  Json j;
  j["rho_max"] = rational_json(r.rho_max);
  j["max_g"] = r.max_g;
  Json pv = Json::array();
  for (const DualityEntry& e : r.per_vertex)
    pv.push_back({{"v", e.v},
                  {"rho_star", rational_json(e.rho_star)},
                  {"g", e.g}});
  j["per_vertex"] = std::move(pv);
  j["max_residual"] = r.max_residual;
  j["pass"] = r.pass;
  return j;
}

inline Json decomposition_json(const Decomposition& d) {
  Json levels = Json::array();
  for (const DecompositionLevel& level : d.levels)
    levels.push_back({{"slice", level.slice},
                      {"density", rational_json(level.density)}});
  return levels;
}

inline Json orientation_json(const FractionalOrientation& o, double eta) {
  const Graph& g = o.graph();
  Json j;
  Json edges = Json::array();
  for (int e = 0; e < g.m(); ++e) {
    if (o.edge_removed(e)) continue;
    edges.push_back({{"u", g.edge(e).u},
                     {"v", g.edge(e).v},
                     {"g_uv", o.mass_from(e, g.edge(e).u)},
                     {"g_vu", o.mass_from(e, g.edge(e).v)}});
  }
  j["edges"] = std::move(edges);
  Json verts = Json::array();
  for (int v = 0; v < g.n(); ++v)
    verts.push_back({{"v", v},
                     {"g", o.out_degree(v)},
                     {"level", level_of(o.out_degree(v), eta)}});
  j["vertices"] = std::move(verts);
  return j;
}

inline Json schedule_json(const ClockSchedule& s) {
  Json j;
  j["eps"] = s.eps;
  j["n"] = s.n;
  j["eta"] = s.eta;
  j["ell"] = s.ell;
  j["ell_hat"] = s.ell_hat;
  j["h_start"] = s.h_start;
  j["h_stop"] = s.h_stop;
  j["minutes_per_hour"] = s.minutes_per_hour;
  j["rounds_per_even_minute"] = s.rounds_per_even_minute;
  j["rounds_per_second"] = u128_json(s.rounds_per_second());
  j["total_rounds"] = u128_json(s.total_rounds());
  return j;
}

inline Json congest_json(const CongestResult& r) {
  Json j;
  j["budget"] = u128_json(r.budget);
  j["rounds"] = r.trace.rounds;
  j["max_bits"] = r.trace.max_bits;
  Json comps = Json::array();
  for (const CongestComponentResult& c : r.components) {
    Json cj;
    cj["vertices"] = c.vertices;
    cj["schedule"] = schedule_json(c.schedule);
    cj["budget"] = u128_json(c.budget);
    cj["rounds_simulated"] = c.trace.rounds;
    cj["rounds_abstract"] = u128_json(c.trace.abstract_total());
    cj["max_bits"] = c.trace.max_bits;
    cj["decay_ok"] = c.decay_ok;
    cj["nesting_ok"] = c.nesting_ok;
    cj["shift_ok"] = c.shift_ok;
    Json hours = Json::array();
    for (const HourReport& h : c.hours)
      if (h.flips > 0 || h.active_minutes > 0)
        hours.push_back({{"h", h.h},
                         {"active_minutes", h.active_minutes},
                         {"flips", h.flips}});
    cj["active_hours"] = std::move(hours);
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  return j;
}

inline Json report_json(const ReportResult& r) {
  Json j;
  j["bits"] = r.bits;
  j["ones"] = r.ones;
  if (r.subgraph_density)
    j["density"] = rational_json(*r.subgraph_density);
  else
    j["density"] = nullptr;
  Json leaders = Json::array();
  for (const LeaderRecord& rec : r.leaders)
    leaders.push_back({{"leader", rec.leader},
                       {"active", rec.active},
                       {"h_max", rec.h_max},
                       {"k", rec.k},
                       {"cutoff", rec.cutoff}});
  j["leaders"] = std::move(leaders);
  j["radius"] = r.radius;
  return j;
}

}  // namespace ldl
