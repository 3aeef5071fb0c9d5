#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldl/graph.hpp"

namespace ldl {

// ---------------------------------------------------------------------------
// Bit-exact message encoding. CONGEST charges per-edge per-round message
// size in bits, so payloads are packed rather than estimated.
// ---------------------------------------------------------------------------

class BitWriter {
 public:
  void put(std::uint64_t value, int bits) {
    for (int i = 0; i < bits; ++i)
      bits_.push_back((value >> i) & 1u ? 1 : 0);
  }
  void put_signed(std::int64_t value, int bits) {
    put(static_cast<std::uint64_t>(value) & ((bits == 64 ? ~0ull : (1ull << bits) - 1)), bits);
  }
  const std::vector<std::uint8_t>& raw() const { return bits_; }
  std::size_t size_bits() const { return bits_.size(); }

 private:
  std::vector<std::uint8_t> bits_;
};

class BitReader {
 public:
  explicit BitReader(const std::vector<std::uint8_t>& bits) : bits_(bits) {}
  std::uint64_t get(int bits) {
    std::uint64_t v = 0;
    for (int i = 0; i < bits; ++i) {
      if (pos_ >= bits_.size()) throw std::out_of_range("bitreader: underrun");
      v |= static_cast<std::uint64_t>(bits_[pos_++]) << i;
    }
    return v;
  }
  std::int64_t get_signed(int bits) {
    std::uint64_t v = get(bits);
    if (bits < 64 && (v >> (bits - 1)) & 1u) v |= ~((1ull << bits) - 1);
    return static_cast<std::int64_t>(v);
  }
  bool done() const { return pos_ >= bits_.size(); }

 private:
  const std::vector<std::uint8_t>& bits_;
  std::size_t pos_ = 0;
};

struct Message {
  std::vector<std::uint8_t> bits;
  std::size_t size_bits() const { return bits.size(); }
};

// q-bit fixed point for fractional values on the wire (default q = 32
// fractional bits, 16 integer bits). Values are floored onto the grid.
inline constexpr int kFixedFracBits = 32;
inline constexpr int kFixedTotalBits = 48;

inline std::uint64_t to_fixed(double v) {
  if (v < 0) v = 0;
  double scaled = std::floor(v * 4294967296.0);  // 2^32
  double cap = std::ldexp(1.0, kFixedTotalBits) - 1.0;
  if (scaled > cap) scaled = cap;
  return static_cast<std::uint64_t>(scaled);
}
inline double from_fixed(std::uint64_t raw) {
  return static_cast<double>(raw) / 4294967296.0;
}
// Round-trips a value through the wire grid.
inline double quantize(double v) { return from_fixed(to_fixed(v)); }

// ---------------------------------------------------------------------------
// Trace: rounds executed, bandwidth accounting, abstract round charges,
// outputs and violation log.
// ---------------------------------------------------------------------------

struct AbstractCharge {
  std::string label;
  unsigned __int128 rounds;
};

inline std::string u128_str(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back('0' + static_cast<char>(v % 10));
    v /= 10;
  }
  return std::string(s.rbegin(), s.rend());
}

struct Trace {
  std::uint64_t rounds = 0;  // simulated lockstep rounds
  std::vector<AbstractCharge> abstract_rounds;
  std::size_t max_bits = 0;  // max message size over the whole run
  std::vector<std::pair<std::uint64_t, std::size_t>> round_bits;  // sparse
  std::map<int, std::string> outputs;  // node -> serialized output
  std::vector<std::string> violations;
  bool all_halted = false;

  unsigned __int128 abstract_total() const {
    unsigned __int128 t = 0;
    for (const AbstractCharge& c : abstract_rounds) t += c.rounds;
    return t;
  }
  unsigned __int128 total_rounds() const { return abstract_total() + rounds; }
};

// Labeled abstract cost (oracle-executed subroutines); merges consecutive
// charges with the same label.
inline void charge_abstract_rounds(Trace& t, const std::string& label,
                                   unsigned __int128 rounds) {
  if (!t.abstract_rounds.empty() && t.abstract_rounds.back().label == label)
    t.abstract_rounds.back().rounds += rounds;
  else if (rounds > 0 || t.abstract_rounds.empty())
    t.abstract_rounds.push_back({label, rounds});
}

// ---------------------------------------------------------------------------
// Lockstep network: nodes exchange at most one message per incident edge per
// round; delivery is a barrier. CONGEST mode enforces the bandwidth bound.
// ---------------------------------------------------------------------------

enum class SimMode { kLocal, kCongest };
enum class BandwidthPolicy { kStrict, kLenient };

struct BandwidthError : std::runtime_error {
  int edge;
  std::uint64_t round;
  BandwidthError(const std::string& what, int e, std::uint64_t r)
      : std::runtime_error(what), edge(e), round(r) {}
};

struct TimeoutError : std::runtime_error {
  Trace partial;
  TimeoutError(const std::string& what, Trace t)
      : std::runtime_error(what), partial(std::move(t)) {}
};

class SyncNetwork {
 public:
  SyncNetwork(const Graph& g, SimMode mode, std::size_t bandwidth_bits,
              BandwidthPolicy policy)
      : g_(g),
        mode_(mode),
        bandwidth_(bandwidth_bits),
        policy_(policy),
        outbox_(g.m()),
        inbox_(g.m()) {}

  static std::size_t default_bandwidth(int n, int c = 8) {
    int logn = 1;
    while ((1 << logn) < n) ++logn;
    return static_cast<std::size_t>(c) * logn;
  }

  const Graph& graph() const { return g_; }
  Trace& trace() { return trace_; }
  std::uint64_t round() const { return trace_.rounds; }

  // Queue a message from x across edge e for delivery next round.
  void send(int e, int x, Message msg) {
    slot(outbox_, e, x) = std::move(msg);
  }

  // Received by x across edge e in the last exchange, if any.
  const std::optional<Message>& recv(int e, int x) const {
    return slot(inbox_, e, g_.other_end(e, x));
  }

  // Barrier: delivers all queued messages, advances the round counter and
  // does the bandwidth accounting.
  void exchange() {
    std::size_t round_max = 0;
    for (int e = 0; e < g_.m(); ++e) {
      for (auto* m : {&outbox_[e].from_u, &outbox_[e].from_v}) {
        if (!m->has_value()) continue;
        std::size_t bits = (*m)->size_bits();
        round_max = std::max(round_max, bits);
        if (mode_ == SimMode::kCongest && bits > bandwidth_) {
          std::string what = "bandwidth: " + std::to_string(bits) +
                             " bits > " + std::to_string(bandwidth_) +
                             " on edge " + std::to_string(e) + " at round " +
                             std::to_string(trace_.rounds);
          if (policy_ == BandwidthPolicy::kStrict)
            throw BandwidthError(what, e, trace_.rounds);
          trace_.violations.push_back(what);
        }
      }
      inbox_[e] = std::move(outbox_[e]);
      outbox_[e] = {};
    }
    if (round_max > 0) trace_.round_bits.push_back({trace_.rounds, round_max});
    trace_.max_bits = std::max(trace_.max_bits, round_max);
    trace_.rounds += 1;
  }

  // Rounds that tick the clock without any node sending (idle schedule
  // slots). Counted as simulated rounds.
  void idle_rounds(std::uint64_t count) { trace_.rounds += count; }

  // Drops delivered-but-consumed messages. Needed when a protocol phase ends
  // with a read pass instead of another exchange.
  void clear_inbox() {
    for (auto& ch : inbox_) ch = {};
  }

 private:
  struct Channel {
    std::optional<Message> from_u;
    std::optional<Message> from_v;
  };

  std::optional<Message>& slot(std::vector<Channel>& side, int e, int sender) {
    return g_.edge(e).u == sender ? side[e].from_u : side[e].from_v;
  }
  const std::optional<Message>& slot(const std::vector<Channel>& side, int e,
                                     int sender) const {
    return g_.edge(e).u == sender ? side[e].from_u : side[e].from_v;
  }

  const Graph& g_;
  SimMode mode_;
  std::size_t bandwidth_;
  BandwidthPolicy policy_;
  std::vector<Channel> outbox_;
  std::vector<Channel> inbox_;
  Trace trace_;
};

// ---------------------------------------------------------------------------
// Generic node-program runner. A program is instantiated once per node; step
// must be a pure function of the node's own state and the received messages.
// ---------------------------------------------------------------------------

struct LocalView {
  int id = 0;
  int n = 0;
  std::vector<int> incident_edges;  // graph edge ids
  std::vector<int> neighbors;      // aligned with incident_edges
};

class RoundIO {
 public:
  RoundIO(SyncNetwork& net, const LocalView& view)
      : net_(net), view_(view) {}

  std::uint64_t round() const { return net_.round(); }

  // Inbox by local edge index (aligned with view.incident_edges).
  const std::optional<Message>& in(int local_edge) const {
    return net_.recv(view_.incident_edges[local_edge], view_.id);
  }
  void out(int local_edge, Message m) {
    net_.send(view_.incident_edges[local_edge], view_.id, std::move(m));
  }
  void halt(std::string output = "") {
    halted = true;
    output_text = std::move(output);
  }

  bool halted = false;
  std::string output_text;

 private:
  SyncNetwork& net_;
  const LocalView& view_;
};

struct NodeProgram {
  virtual ~NodeProgram() = default;
  virtual void init(const LocalView& view) = 0;
  virtual void step(RoundIO& io) = 0;
};

struct ProgramFactory {
  virtual ~ProgramFactory() = default;
  virtual std::unique_ptr<NodeProgram> make() const = 0;
};

struct RunOptions {
  std::uint64_t budget = 1 << 20;
  std::size_t bandwidth_bits = 0;  // 0: default 8*ceil(log2 n)
  BandwidthPolicy policy = BandwidthPolicy::kStrict;
};

inline Trace run(const Graph& g, const ProgramFactory& factory, SimMode mode,
                 const RunOptions& opts = {}) {
  std::size_t bw = opts.bandwidth_bits
                       ? opts.bandwidth_bits
                       : SyncNetwork::default_bandwidth(std::max(2, g.n()));
  if (mode == SimMode::kCongest && bw < 1)
    throw std::invalid_argument("run: CONGEST needs bandwidth >= 1");
  SyncNetwork net(g, mode, bw, opts.policy);

  std::vector<LocalView> views(g.n());
  std::vector<std::unique_ptr<NodeProgram>> nodes;
  for (int v = 0; v < g.n(); ++v) {
    views[v].id = v;
    views[v].n = g.n();
    for (int e : g.incident(v)) {
      views[v].incident_edges.push_back(e);
      views[v].neighbors.push_back(g.other_end(e, v));
    }
    nodes.push_back(factory.make());
    nodes.back()->init(views[v]);
  }

  std::vector<char> halted(g.n(), 0);
  int halted_count = 0;
  while (halted_count < g.n()) {
    if (net.round() >= opts.budget) {
      Trace partial = net.trace();
      throw TimeoutError("run: budget of " + std::to_string(opts.budget) +
                             " rounds exhausted",
                         std::move(partial));
    }
    for (int v = 0; v < g.n(); ++v) {
      if (halted[v]) continue;
      RoundIO io(net, views[v]);
      nodes[v]->step(io);
      if (io.halted) {
        halted[v] = 1;
        ++halted_count;
        net.trace().outputs[v] = io.output_text;
      }
    }
    if (halted_count == g.n()) break;  // all done; no trailing empty round
    net.exchange();
  }
  net.trace().all_halted = true;
  return net.trace();
}

}  // namespace ldl
