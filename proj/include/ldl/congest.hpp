#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldl/exact.hpp"
#include "ldl/flow.hpp"
#include "ldl/graph.hpp"
#include "ldl/orientation.hpp"
#include "ldl/sim.hpp"

namespace ldl {

// ---------------------------------------------------------------------------
// Clock schedule. Hours tick downward from the highest occupied level; each
// hour runs 2*ceil(1/eta)+2 minutes; even minutes are message rounds, odd
// minutes are blocking-flow seconds charged through the abstract cost model.
//
// The paper-style schedule takes ell = ceil(eps^-2 log2^2 n) as both the top
// hour and the seconds span. With eta = eps^2/(128 log2 n) the actual level
// of an out-degree d is log(d)/log(1+eta/2) ~ 256 eps^-2 log2(n) log2(d),
// far above ell, so the run derives the real top level l' (and bottom level)
// from the initial orientation and uses ell_hat = max(ell, l') wherever the
// schedule says ell. Hours likewise continue below zero when sub-unit
// out-degrees occupy negative levels; stopping at hour zero would strand
// violating edges between negative levels.
// ---------------------------------------------------------------------------

enum class BlockingModel { kIdentity, kH4, kH6Sqrt };

inline BlockingModel blocking_model_from_name(const std::string& name) {
  if (name == "id" || name == "identity") return BlockingModel::kIdentity;
  if (name == "h4") return BlockingModel::kH4;
  if (name == "h6sqrt") return BlockingModel::kH6Sqrt;
  throw std::invalid_argument("unknown blocking model '" + name + "'");
}

inline unsigned __int128 blocking_rounds(BlockingModel model, std::int64_t h,
                                         int n) {
  if (h < 0) h = 0;
  unsigned __int128 hh = static_cast<unsigned __int128>(h);
  switch (model) {
    case BlockingModel::kIdentity:
      return hh;
    case BlockingModel::kH4:
      return hh * hh * hh * hh;
    case BlockingModel::kH6Sqrt: {
      unsigned __int128 h6 = hh * hh * hh * hh * hh * hh;
      double root = std::sqrt(std::log2(std::max(2.0, double(n))));
      int shift = static_cast<int>(std::ceil(root));
      return h6 << shift;
    }
  }
  return hh;
}

struct ClockSchedule {
  double eps = 0;
  int n = 0;
  double eta = 0;
  std::int64_t ell = 0;      // ceil(eps^-2 (log2 n)^2)
  std::int64_t ell_hat = 0;  // max(ell, starting top level)
  int h_start = 0;           // first (highest) hour
  int h_stop = 0;            // last hour, inclusive
  std::int64_t minutes_per_hour = 0;
  std::int64_t even_minute_iterations = 0;  // 2*ceil(log_{8/7} n)+1
  std::int64_t rounds_per_even_minute = 0;  // two rounds per iteration
  BlockingModel model = BlockingModel::kIdentity;

  std::int64_t seconds_in_hour(std::int64_t h) const {
    return std::max<std::int64_t>(0, ell_hat - h + 1);
  }
  unsigned __int128 rounds_per_second() const {
    return static_cast<unsigned __int128>(ell_hat) +
           blocking_rounds(model, ell_hat, n);
  }
  unsigned __int128 hour_rounds(std::int64_t h) const {
    unsigned __int128 evens = static_cast<unsigned __int128>(
        minutes_per_hour / 2);
    return evens * static_cast<unsigned __int128>(rounds_per_even_minute) +
           evens * static_cast<unsigned __int128>(seconds_in_hour(h)) *
               rounds_per_second();
  }
  // Clock rounds over all hours (the preamble is accounted separately).
  unsigned __int128 total_rounds() const {
    unsigned __int128 total = 0;
    for (std::int64_t h = h_start; h >= h_stop; --h) total += hour_rounds(h);
    return total;
  }
};

inline ClockSchedule make_schedule(double eps, int n,
                                   BlockingModel model = BlockingModel::kIdentity) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("make_schedule: eps out of (0,1]");
  if (n < 2) throw std::invalid_argument("make_schedule: need n >= 2");
  ClockSchedule s;
  s.eps = eps;
  s.n = n;
  s.eta = eta_for(eps, n);
  s.ell = schedule_k(eps, n);
  s.ell_hat = s.ell;
  s.h_start = static_cast<int>(s.ell);
  s.h_stop = 0;
  s.minutes_per_hour = 2 * static_cast<std::int64_t>(std::ceil(1.0 / s.eta)) + 2;
  std::int64_t log87 = static_cast<std::int64_t>(
      std::ceil(std::log(double(n)) / std::log(8.0 / 7.0)));
  s.even_minute_iterations = 2 * log87 + 1;
  s.rounds_per_even_minute = 2 * s.even_minute_iterations;  // = 4*ceil+2
  s.model = model;
  return s;
}

struct ProtocolBugError : std::runtime_error {
  int hour;
  std::int64_t minute;
  std::int64_t second;
  ProtocolBugError(const std::string& what, int h, std::int64_t m,
                   std::int64_t s)
      : std::runtime_error("protocol bug at (" + std::to_string(h) + ":" +
                           std::to_string(m) + ":" + std::to_string(s) +
                           "): " + what),
        hour(h),
        minute(m),
        second(s) {}
};

// Invariant findings: violating out-edges from levels the clock already
// cleaned. During hour h nothing above h+1 may violate; at even minute
// starts nothing above h.
struct InvariantFinding {
  int edge;
  int from;
  int to;
  int from_level;
  int to_level;
};

inline std::vector<InvariantFinding> check_invariant(
    const FractionalOrientation& o, const std::vector<int>& level, int h,
    bool at_even_minute_start, double tol = kFairTol) {
  std::vector<InvariantFinding> findings;
  const Graph& g = o.graph();
  int bound = at_even_minute_start ? h : h + 1;
  for (int e = 0; e < g.m(); ++e) {
    for (int x : {g.edge(e).u, g.edge(e).v}) {
      int y = g.other_end(e, x);
      if (o.mass_from(e, x) > tol && level[x] > level[y] + 1 &&
          level[x] > bound)
        findings.push_back({e, x, y, level[x], level[y]});
    }
  }
  return findings;
}

struct CongestOptions {
  BlockingModel model = BlockingModel::kIdentity;
  BandwidthPolicy policy = BandwidthPolicy::kStrict;
  std::size_t bandwidth_bits = 0;  // 0: 8*ceil(log2 n) + 64
  double tol = kFairTol;
  bool exhaustive_checks = true;  // invariant checkpoints, decay, nesting
};

struct HourReport {
  int h = 0;
  std::int64_t active_minutes = 0;
  std::int64_t flips = 0;
};

struct CongestComponentResult {
  std::vector<int> vertices;  // global ids
  ClockSchedule schedule;
  unsigned __int128 budget = 0;  // preamble + schedule total
  Trace trace;
  std::vector<HourReport> hours;
  bool decay_ok = true;    // |E_t| <= ceil(7/8 |E_{t-1}|) in even minutes
  bool nesting_ok = true;  // D_{s+1} subset of D_s, height strictly down
  bool shift_ok = true;    // per-second level moves within Observation bounds
};

struct CongestResult {
  FractionalOrientation orientation;
  std::vector<int> final_level;  // protocol's own level bookkeeping
  Trace trace;                   // merged: rounds = max over components
  std::vector<CongestComponentResult> components;
  unsigned __int128 budget = 0;  // max over components
};

// ---------------------------------------------------------------------------
// Engine for one connected component (dense ids). Even minutes run through
// the lockstep network with bit-packed messages; odd-minute seconds collect
// the DAG centrally and charge rounds through the blocking cost model.
// ---------------------------------------------------------------------------

class CongestEngine {
 public:
  CongestEngine(const Graph& g, int global_n, double eps,
                const CongestOptions& opts)
      : g_(g),
        opts_(opts),
        sched_(make_schedule(eps, global_n, opts.model)),
        o_(init_half(g)),
        level_(g.n()),
        view_level_u_(g.m()),
        view_level_v_(g.m()),
        changed_(g.n(), 0),
        in_vm_(g.n(), 0),
        dropped_(g.n(), 0),
        minute_start_level_(g.n()),
        net_(g, SimMode::kCongest,
             opts.bandwidth_bits
                 ? opts.bandwidth_bits
                 : SyncNetwork::default_bandwidth(std::max(2, global_n)) + 64,
             opts.policy) {
    if (!g.unit_weight())
      throw std::invalid_argument("congest: unit-weight graphs only");
    for (int v = 0; v < g_.n(); ++v)
      level_[v] = level_of(o_.out_degree(v), sched_.eta, LevelMove::kNone,
                           opts_.tol);
  }

  CongestComponentResult run() {
    run_preamble();
    int top = *std::max_element(level_.begin(), level_.end());
    int bottom = *std::min_element(level_.begin(), level_.end());
    sched_.ell_hat = std::max(sched_.ell, static_cast<std::int64_t>(top));
    sched_.h_start = top;
    sched_.h_stop = std::min(0, bottom + 1);

    result_.schedule = sched_;
    result_.budget = static_cast<unsigned __int128>(sched_.n) +
                     (sched_.h_start >= sched_.h_stop ? sched_.total_rounds()
                                                      : 0);

    for (int h = sched_.h_start; h >= sched_.h_stop; --h) run_hour(h);

    // Termination: eta-fair means no violating edges at all.
    auto leftovers = violating_edges_from_level_above(kSentinelLevel);
    if (!leftovers.empty())
      throw ProtocolBugError("violating edges survive the clock",
                             sched_.h_stop, 0, 0);
    finish_trace();
    return std::move(result_);
  }

  // --- test access -------------------------------------------------------
  const FractionalOrientation& orientation() const { return o_; }
  const std::vector<int>& levels() const { return level_; }
  ClockSchedule& schedule() { return sched_; }
  Trace& trace() { return net_.trace(); }

  void run_preamble() {
    // n rounds of max/min level flooding; the first round also seeds the
    // neighbor level views.
    int rounds = sched_.n;
    std::vector<int> vmax(g_.n()), vmin(g_.n());
    for (int v = 0; v < g_.n(); ++v) vmax[v] = vmin[v] = level_[v];
    for (int r = 0; r < rounds; ++r) {
      for (int v = 0; v < g_.n(); ++v) {
        for (int e : g_.incident(v)) {
          BitWriter w;
          w.put(kMsgPre, 3);
          w.put_signed(vmax[v], kLevelBits);
          w.put_signed(vmin[v], kLevelBits);
          w.put_signed(level_[v], kLevelBits);
          net_.send(e, v, Message{w.raw()});
        }
      }
      net_.exchange();
      for (int v = 0; v < g_.n(); ++v) {
        for (int e : g_.incident(v)) {
          const auto& msg = net_.recv(e, v);
          if (!msg) continue;
          BitReader rd(msg->bits);
          if (rd.get(3) != kMsgPre) throw std::logic_error("preamble: bad tag");
          int mx = static_cast<int>(rd.get_signed(kLevelBits));
          int mn = static_cast<int>(rd.get_signed(kLevelBits));
          int lvl = static_cast<int>(rd.get_signed(kLevelBits));
          vmax[v] = std::max(vmax[v], mx);
          vmin[v] = std::min(vmin[v], mn);
          set_view(e, v, lvl);
        }
      }
    }
    for (int v = 1; v < g_.n(); ++v)
      if (vmax[v] != vmax[0] || vmin[v] != vmin[0])
        throw std::logic_error("preamble: flood did not stabilize");
    net_.clear_inbox();
  }

  void run_hour(int h) {
    HourReport hour{h, 0, 0};
    std::int64_t pairs = sched_.minutes_per_hour / 2;
    for (std::int64_t pair = 0; pair < pairs; ++pair) {
      std::int64_t m_even = 2 * pair;
      if (opts_.exhaustive_checks) {
        auto findings = check_invariant(o_, level_, h, true, opts_.tol);
        if (!findings.empty())
          throw ProtocolBugError("invariant failed at even minute start", h,
                                 m_even, 0);
      }
      std::int64_t flips_before = flips_total_;
      run_even_minute(h, m_even);
      bool t_empty = run_odd_minute(h, m_even + 1);
      bool even_idle = flips_total_ == flips_before;
      if (flips_total_ != flips_before) hour.active_minutes += 2;
      if (even_idle && t_empty) {
        // State is frozen; the remaining minutes of the hour are identical
        // no-ops. Charge their rounds in bulk.
        std::int64_t left = pairs - pair - 1;
        if (left > 0) {
          net_.idle_rounds(static_cast<std::uint64_t>(
              left * sched_.rounds_per_even_minute));
          charge_seconds(static_cast<unsigned __int128>(left) *
                         static_cast<unsigned __int128>(
                             sched_.seconds_in_hour(h)));
        }
        break;
      }
    }
    hour.flips = flips_total_ - hour_flips_mark_;
    hour_flips_mark_ = flips_total_;
    if (opts_.exhaustive_checks) {
      auto findings = check_invariant(o_, level_, h - 1, true, opts_.tol);
      if (!findings.empty())
        throw ProtocolBugError("invariant failed at hour end", h,
                               sched_.minutes_per_hour, 0);
    }
    result_.hours.push_back(hour);
  }

  // Processes SYNC and ACCEPT messages delivered by the last exchange.
  // ACCEPT tells a sender that its offer was taken: the shared truth state
  // was already flipped by the receiver, so the sender recomputes its level
  // and learns the receiver's announced one.
  void drain_sync_accept_inbox() {
    for (int v = 0; v < g_.n(); ++v) {
      for (int e : g_.incident(v)) {
        const auto& msg = net_.recv(e, v);
        if (!msg) continue;
        BitReader rd(msg->bits);
        std::uint64_t tag = rd.get(3);
        if (tag == kMsgSync) {
          set_view(e, v, static_cast<int>(rd.get_signed(kLevelBits)));
        } else if (tag == kMsgAccept) {
          rd.get(kFixedTotalBits);  // amount; truth already updated
          int old_level = level_[v];
          update_level(v, LevelMove::kDown);
          if (level_[v] != old_level) changed_[v] = 1;
          set_view(e, v, static_cast<int>(rd.get_signed(kLevelBits)));
        } else {
          throw std::logic_error("unexpected message in sender round");
        }
      }
    }
  }

  // Even minute: iterations of offer/accept rounds draining violating
  // out-edges from level h.
  void run_even_minute(int h, std::int64_t minute) {
    for (int v = 0; v < g_.n(); ++v) {
      minute_start_level_[v] = level_[v];
      in_vm_[v] = (level_[v] == h && has_violating_out_edge(v)) ? 1 : 0;
      dropped_[v] = 0;
    }
    std::size_t decay_prev = count_violating_from_level(h);

    std::int64_t iter = 0;
    for (; iter < sched_.even_minute_iterations; ++iter) {
      // Round A: read the previous accept round, then send offers and level
      // announcements.
      drain_sync_accept_inbox();
      if (opts_.exhaustive_checks && iter > 0) {
        // |E_t| at the start of iteration t, after sender levels settled.
        std::size_t now = count_violating_from_level(h);
        if (decay_prev > 0 && now > (7 * decay_prev + 7) / 8)
          result_.decay_ok = false;
        decay_prev = now;
      }
      bool any_message = false;
      for (int v = 0; v < g_.n(); ++v) {
        std::vector<int> offer_edges;
        if (in_vm_[v] && level_[v] == h) offer_edges = violating_out_edges(v);
        if (!offer_edges.empty()) {
          double delta = o_.out_degree(v) - level_floor(h - 1, sched_.eta);
          for (int e : offer_edges) {
            BitWriter w;
            w.put(kMsgOffer, 3);
            w.put(to_fixed(delta), kFixedTotalBits);
            w.put(static_cast<std::uint64_t>(offer_edges.size()), 16);
            net_.send(e, v, Message{w.raw()});
          }
          any_message = true;
        }
        if (changed_[v]) {
          for (int e : g_.incident(v)) {
            if (std::find(offer_edges.begin(), offer_edges.end(), e) !=
                offer_edges.end())
              continue;  // offers imply level h
            BitWriter w;
            w.put(kMsgSync, 3);
            w.put_signed(level_[v], kLevelBits);
            net_.send(e, v, Message{w.raw()});
          }
          changed_[v] = 0;
          any_message = true;
        }
      }
      if (!any_message) {
        // Nothing in flight and nothing to say: the rest of the minute is
        // idle by induction.
        std::int64_t left = sched_.even_minute_iterations - iter;
        net_.idle_rounds(static_cast<std::uint64_t>(2 * left));
        break;
      }
      net_.exchange();

      // Round B: receivers accept greedily, largest delta first.
      struct Offer {
        double delta;
        int sender;
        int edge;
        double amount;
      };
      for (int b = 0; b < g_.n(); ++b) {
        std::vector<Offer> offers;
        for (int e : g_.incident(b)) {
          const auto& msg = net_.recv(e, b);
          if (!msg) continue;
          BitReader rd(msg->bits);
          std::uint64_t tag = rd.get(3);
          int a = g_.other_end(e, b);
          if (tag == kMsgSync) {
            set_view(e, b, static_cast<int>(rd.get_signed(kLevelBits)));
          } else if (tag == kMsgOffer) {
            double delta = from_fixed(rd.get(kFixedTotalBits));
            std::uint64_t count = rd.get(16);
            set_view(e, b, h);  // offers come from level h
            offers.push_back(
                {delta, a, e, count ? delta / double(count) : 0.0});
          }
        }
        if (offers.empty()) continue;
        std::sort(offers.begin(), offers.end(), [](const Offer& x,
                                                   const Offer& y) {
          if (x.delta != y.delta) return x.delta > y.delta;
          return x.sender < y.sender;
        });
        double cap = level_floor(h, sched_.eta);
        int old_level = level_[b];
        std::vector<std::pair<int, double>> accepted;  // edge -> amount
        for (const Offer& of : offers) {
          double room = cap - o_.out_degree(b);
          if (room <= opts_.tol) break;
          double amt = quantize(std::min(
              {of.amount, o_.mass_from(of.edge, of.sender), room}));
          if (amt <= 0.0) continue;
          o_.flip(of.edge, of.sender, amt);
          flips_total_ += 1;
          accepted.push_back({of.edge, amt});
        }
        update_level(b, LevelMove::kUp);
        if (level_[b] != old_level) changed_[b] = 1;
        for (auto& [e, amt] : accepted) {
          BitWriter w;
          w.put(kMsgAccept, 3);
          w.put(to_fixed(amt), kFixedTotalBits);
          w.put_signed(level_[b], kLevelBits);
          net_.send(e, b, Message{w.raw()});
        }
        if (changed_[b]) {
          for (int e : g_.incident(b)) {
            bool used = false;
            for (auto& [ae, amt] : accepted) used = used || ae == e;
            if (used) continue;
            BitWriter w;
            w.put(kMsgSync, 3);
            w.put_signed(level_[b], kLevelBits);
            net_.send(e, b, Message{w.raw()});
          }
          changed_[b] = 0;
        }
      }
      net_.exchange();
    }
    // Flush the final accept round (bookkeeping the odd minute's first
    // construction rounds pay for), then freeze droppers.
    drain_sync_accept_inbox();
    net_.clear_inbox();
    if (opts_.exhaustive_checks && iter > 0 && decay_prev > 0) {
      std::size_t now = count_violating_from_level(h);
      if (now > (7 * decay_prev + 7) / 8) result_.decay_ok = false;
    }
    for (int v = 0; v < g_.n(); ++v) {
      dropped_[v] = level_[v] < minute_start_level_[v] ? 1 : 0;
      if (dropped_[v] && minute_start_level_[v] - level_[v] != 1)
        throw ProtocolBugError("vertex dropped more than one level", h, minute,
                               0);
    }
    for (int v = 0; v < g_.n(); ++v) {
      if (level_[v] != h) continue;
      for (int e : g_.incident(v)) {
        int y = g_.other_end(e, v);
        if (o_.mass_from(e, v) > opts_.tol && level_[v] > level_[y] + 1)
          throw ProtocolBugError("residual violating out-edge from level h", h,
                                 minute, 0);
      }
    }
  }

  // Odd minute: seconds of DAG + blocking flow. Returns true when T_m was
  // empty (the minute was a no-op).
  bool run_odd_minute(int h, std::int64_t minute) {
    std::vector<int> t_members;
    for (int v = 0; v < g_.n(); ++v) {
      if (in_vm_[v] && dropped_[v] && has_violating_in_edge(v))
        t_members.push_back(v);
    }
    std::vector<int> l_m = level_;  // frozen at minute start
    std::int64_t seconds = sched_.seconds_in_hour(h);
    if (t_members.empty()) {
      charge_seconds(static_cast<unsigned __int128>(seconds));
      return true;
    }

    std::vector<char> in_t(g_.n(), 0);
    for (int v : t_members) in_t[v] = 1;

    DagSnapshot prev;
    bool have_prev = false;
    for (std::int64_t s = 0; s < seconds; ++s) {
      DagSnapshot dag = build_dag(h, l_m, in_t);
      if (dag.edges.empty()) {
        for (int v : t_members)
          if (has_violating_in_edge(v))
            throw ProtocolBugError("empty DAG but violating in-edges remain",
                                   h, minute, s);
        charge_seconds(static_cast<unsigned __int128>(seconds - s));
        return false;
      }
      if (have_prev && opts_.exhaustive_checks) {
        if (!subset_of(dag.edges, prev.edges) ||
            !subset_of(dag.vertices, prev.vertices) ||
            dag.height >= prev.height)
          result_.nesting_ok = false;
        for (int src : prev.sources)
          if (std::binary_search(dag.vertices.begin(), dag.vertices.end(),
                                 src))
            result_.nesting_ok = false;
      }
      second_step(h, minute, s, l_m, in_t, dag);
      charge_seconds(1);
      prev = std::move(dag);
      have_prev = true;
    }
    for (int v : t_members)
      if (has_violating_in_edge(v))
        throw ProtocolBugError("nonempty DAG at the final second", h, minute,
                               seconds);
    return false;
  }

  // D_s structure, exposed for tests.
  struct DagSnapshot {
    std::vector<std::pair<int, int>> edges;  // (tail, head), tail above head
    std::vector<int> vertices;               // sorted
    std::vector<int> sources;                // sorted, excludes T_m
    int height = 0;                          // vertices on the longest path
  };

  DagSnapshot build_dag(int h, const std::vector<int>& l_m,
                        const std::vector<char>& in_t) {
    DagSnapshot dag;
    std::vector<std::pair<int, int>> candidates;
    for (int e = 0; e < g_.m(); ++e) {
      for (int x : {g_.edge(e).u, g_.edge(e).v}) {
        int y = g_.other_end(e, x);
        if (o_.mass_from(e, x) <= opts_.tol) continue;
        bool violating_into_t =
            in_t[y] && level_[x] > level_[y] + 1;
        bool chain_edge = level_[x] == l_m[x] && l_m[x] > h + 1 &&
                          level_[x] > level_[y];
        if (violating_into_t || chain_edge) candidates.push_back({x, y});
      }
    }
    // Keep vertices with a directed path to T_m: reverse reachability.
    std::vector<char> reach(g_.n(), 0);
    for (int v = 0; v < g_.n(); ++v) reach[v] = in_t[v];
    bool grew = true;
    while (grew) {
      grew = false;
      for (auto& [x, y] : candidates)
        if (reach[y] && !reach[x]) {
          reach[x] = 1;
          grew = true;
        }
    }
    std::set<int> verts;
    std::vector<char> has_in(g_.n(), 0);
    for (auto& [x, y] : candidates) {
      if (!reach[y]) continue;
      dag.edges.push_back({x, y});
      verts.insert(x);
      verts.insert(y);
      has_in[y] = 1;
    }
    for (int v = 0; v < g_.n(); ++v)
      if (in_t[v]) verts.insert(v);
    dag.vertices.assign(verts.begin(), verts.end());
    for (int v : dag.vertices)
      if (!has_in[v] && !in_t[v]) dag.sources.push_back(v);
    std::sort(dag.edges.begin(), dag.edges.end());

    // Height via longest path; edges strictly descend in level, so the
    // candidate set is acyclic by construction.
    std::vector<int> depth(g_.n(), 1);
    std::vector<std::pair<int, int>> by_level = dag.edges;
    std::sort(by_level.begin(), by_level.end(),
              [&](const auto& a, const auto& b) {
                return level_[a.first] > level_[b.first];
              });
    for (auto& [x, y] : by_level) depth[y] = std::max(depth[y], depth[x] + 1);
    for (int v : dag.vertices) dag.height = std::max(dag.height, depth[v]);
    return dag;
  }

  void second_step(int h, std::int64_t minute, std::int64_t s,
                   const std::vector<int>& l_m, const std::vector<char>& in_t,
                   const DagSnapshot& dag) {
    // Build D_s^* with per-source and per-terminal attachment nodes.
    FlowNetwork net;
    std::vector<int> node_of(g_.n(), -1);
    for (int v : dag.vertices) node_of[v] = net.add_node();
    net.source = net.add_node();
    net.sink = net.add_node();
    for (int u : dag.sources) {
      int su = net.add_node();
      double sigma = o_.out_degree(u) - level_floor(l_m[u] - 1, sched_.eta);
      net.add_arc(net.source, su,
                  std::numeric_limits<double>::infinity());
      net.add_arc(su, node_of[u], std::max(0.0, sigma));
    }
    for (int v : dag.vertices) {
      if (!in_t[v]) continue;
      int tv = net.add_node();
      double delta = level_floor(h + 1, sched_.eta) - o_.out_degree(v);
      net.add_arc(node_of[v], tv, std::max(0.0, delta));
      net.add_arc(tv, net.sink, std::numeric_limits<double>::infinity());
    }
    struct EdgeRef {
      int arc;
      int tail;
      int edge;
    };
    std::vector<EdgeRef> refs;
    for (auto& [x, y] : dag.edges) {
      int e = find_edge(x, y);
      int arc = net.add_arc(node_of[x], node_of[y], o_.mass_from(e, x), e);
      refs.push_back({arc, x, e});
    }

    blocking_flow(net);
    if (opts_.exhaustive_checks) {
      if (has_unsaturated_path(net))
        throw ProtocolBugError("flow is not blocking", h, minute, s);
      if (max_conservation_error(net) > 1e-7)
        throw ProtocolBugError("flow conservation breach", h, minute, s);
    }

    // Flip DAG edges by their flow; interiors keep their out-degree.
    std::vector<int> level_before = level_;
    std::vector<double> g_before = o_.out_degrees();
    for (const EdgeRef& r : refs) {
      double f = net.arcs[r.arc].flow;
      if (f <= 0.0) continue;
      o_.flip(r.edge, r.tail, quantize(f));
      flips_total_ += 1;
    }
    for (int v : dag.vertices) {
      double before = g_before[v];
      double after = o_.out_degree(v);
      if (std::abs(after - before) <= opts_.tol) continue;
      update_level(v, after > before ? LevelMove::kUp : LevelMove::kDown);
      if (level_[v] != level_before[v]) refresh_views_of(v);
    }
    if (opts_.exhaustive_checks) {
      for (int v = 0; v < g_.n(); ++v) {
        int d = level_[v] - level_before[v];
        bool ok;
        if (level_before[v] > h)
          ok = d == 0 || d == -1;
        else if (level_before[v] == h - 1)
          ok = d == 0 || d == 1;
        else
          ok = d == 0;
        if (!ok) result_.shift_ok = false;
      }
      // Per-edge conservation against the graph weights.
      for (int e = 0; e < g_.m(); ++e) {
        double w = g_.edge(e).weight.to_double();
        double sum = o_.mass_from(e, g_.edge(e).u) +
                     o_.mass_from(e, g_.edge(e).v);
        if (std::abs(sum - w) > 1e-7)
          throw ProtocolBugError("edge weight conservation breach", h, minute,
                                 s);
      }
    }
  }

 private:
  static constexpr std::uint64_t kMsgSync = 1;
  static constexpr std::uint64_t kMsgOffer = 2;
  static constexpr std::uint64_t kMsgAccept = 3;
  static constexpr std::uint64_t kMsgPre = 4;
  static constexpr int kLevelBits = 20;

  int find_edge(int x, int y) const {
    for (int e : g_.incident(x))
      if (g_.other_end(e, x) == y) return e;
    throw std::logic_error("congest: missing edge");
  }

  int view(int e, int x) const {
    return g_.edge(e).u == x ? view_level_v_[e] : view_level_u_[e];
  }
  // Record x's knowledge of the OTHER endpoint of e... stored by owner.
  void set_view(int e, int owner, int lvl) {
    // owner learns the level of the other endpoint.
    if (g_.edge(e).u == owner)
      view_level_v_[e] = lvl;
    else
      view_level_u_[e] = lvl;
  }
  void refresh_views_of(int v) {
    // Oracle-side update (charged rounds): neighbors learn v's level.
    for (int e : g_.incident(v)) set_view(e, g_.other_end(e, v), level_[v]);
  }

  bool has_violating_out_edge(int v) const {
    for (int e : g_.incident(v)) {
      if (o_.mass_from(e, v) > opts_.tol && level_[v] > view(e, v) + 1)
        return true;
    }
    return false;
  }
  std::vector<int> violating_out_edges(int v) const {
    std::vector<int> out;
    for (int e : g_.incident(v))
      if (o_.mass_from(e, v) > opts_.tol && level_[v] > view(e, v) + 1)
        out.push_back(e);
    return out;
  }
  bool has_violating_in_edge(int v) const {
    for (int e : g_.incident(v)) {
      int w = g_.other_end(e, v);
      if (o_.mass_from(e, w) > opts_.tol && level_[w] > level_[v] + 1)
        return true;
    }
    return false;
  }
  std::size_t count_violating_from_level(int h) const {
    std::size_t count = 0;
    for (int e = 0; e < g_.m(); ++e)
      for (int x : {g_.edge(e).u, g_.edge(e).v}) {
        int y = g_.other_end(e, x);
        if (level_[x] == h && o_.mass_from(e, x) > opts_.tol &&
            level_[x] > level_[y] + 1)
          ++count;
      }
    return count;
  }

  void update_level(int v, LevelMove move) {
    double g = o_.out_degree(v);
    double lo = level_floor(level_[v], sched_.eta);
    double hi = level_floor(level_[v] + 1, sched_.eta);
    if (g >= lo - opts_.tol && g <= hi + opts_.tol) return;  // sticky
    level_[v] = level_of(g, sched_.eta, move, opts_.tol);
  }

  std::vector<InvariantFinding> violating_edges_from_level_above(
      int bound) const {
    std::vector<InvariantFinding> out;
    for (int e = 0; e < g_.m(); ++e)
      for (int x : {g_.edge(e).u, g_.edge(e).v}) {
        int y = g_.other_end(e, x);
        if (o_.mass_from(e, x) > opts_.tol && level_[x] > level_[y] + 1 &&
            level_[x] > bound)
          out.push_back({e, x, y, level_[x], level_[y]});
      }
    return out;
  }

  void charge_seconds(unsigned __int128 seconds) {
    if (seconds == 0) return;
    construction_charge_ +=
        seconds * static_cast<unsigned __int128>(sched_.ell_hat);
    blocking_charge_ +=
        seconds * blocking_rounds(sched_.model, sched_.ell_hat, sched_.n);
  }

  static bool subset_of(const std::vector<std::pair<int, int>>& a,
                        const std::vector<std::pair<int, int>>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  }
  static bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  }

  void finish_trace() {
    charge_abstract_rounds(net_.trace(), "dag-construction",
                           construction_charge_);
    charge_abstract_rounds(net_.trace(), "blocking-flow", blocking_charge_);
    result_.trace = net_.trace();
    unsigned __int128 spent = result_.trace.total_rounds();
    if (spent != result_.budget)
      throw std::logic_error(
          "congest: spent rounds " + u128_str(spent) +
          " differ from schedule budget " + u128_str(result_.budget));
  }

  const Graph& g_;
  CongestOptions opts_;
  ClockSchedule sched_;
  FractionalOrientation o_;
  std::vector<int> level_;
  std::vector<int> view_level_u_;  // view held by edge(e).v of u's level
  std::vector<int> view_level_v_;  // view held by edge(e).u of v's level
  std::vector<char> changed_;
  std::vector<char> in_vm_;
  std::vector<char> dropped_;
  std::vector<int> minute_start_level_;
  SyncNetwork net_;
  std::int64_t flips_total_ = 0;
  std::int64_t hour_flips_mark_ = 0;
  unsigned __int128 construction_charge_ = 0;
  unsigned __int128 blocking_charge_ = 0;
  CongestComponentResult result_;
};

// Runs the protocol per connected component and merges the results. Nodes
// know the global n; schedule constants derive from it, while each
// component's hour range comes from its own flooded level extremes.
inline CongestResult run_congest_orientation(const Graph& g, double eps,
                                             const CongestOptions& opts = {}) {
  if (!g.unit_weight())
    throw std::invalid_argument("congest: unit-weight graphs only");
  CongestResult result;
  result.orientation = init_half(g);
  result.final_level.assign(g.n(), kSentinelLevel);
  if (g.n() < 2) {
    result.trace.all_halted = true;
    return result;
  }
  double eta = eta_for(eps, g.n());
  for (int v = 0; v < g.n(); ++v)
    result.final_level[v] = level_of(result.orientation.out_degree(v), eta);

  for (const std::vector<int>& comp : g.components()) {
    if (comp.size() < 2) continue;
    Subgraph sub = induced_subgraph(g, comp);
    Graph local = sub.materialize();
    CongestEngine engine(local, g.n(), eps, opts);
    CongestComponentResult cres = engine.run();

    // Copy the component's final orientation and levels back.
    const FractionalOrientation& lo = engine.orientation();
    auto local_id = [&](int global) {
      return static_cast<int>(std::lower_bound(sub.vertices.begin(),
                                               sub.vertices.end(), global) -
                              sub.vertices.begin());
    };
    for (std::size_t le = 0; le < sub.edge_ids.size(); ++le) {
      int ge = sub.edge_ids[le];
      const Graph::Edge& pe = g.edge(ge);
      result.orientation.set_mass(
          ge, pe.u, lo.mass_from(static_cast<int>(le), local_id(pe.u)));
      result.orientation.set_mass(
          ge, pe.v, lo.mass_from(static_cast<int>(le), local_id(pe.v)));
    }
    for (std::size_t i = 0; i < comp.size(); ++i)
      result.final_level[comp[i]] = engine.levels()[static_cast<int>(i)];

    cres.vertices = comp;
    result.trace.rounds = std::max(result.trace.rounds, cres.trace.rounds);
    result.trace.max_bits = std::max(result.trace.max_bits,
                                     cres.trace.max_bits);
    for (const auto& v : cres.trace.violations)
      result.trace.violations.push_back(v);
    result.budget = std::max(result.budget, cres.budget);
    result.components.push_back(std::move(cres));
  }
  result.orientation.sync_out_degrees();
  result.trace.all_halted = true;
  // Merged abstract charges: keep the per-component breakdown; the top-level
  // trace carries the max-component totals via `budget`.
  return result;
}

}  // namespace ldl
