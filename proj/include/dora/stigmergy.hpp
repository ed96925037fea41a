#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dora/geom.hpp"
#include "dora/rng.hpp"

namespace dora {

// One replicated record of a belief map. (lamport, writer_id) totally orders
// any two entries for the same key.
struct StigmergyEntry {
  CellCoord key;
  double value = 0.0;
  std::uint64_t lamport = 0;
  std::uint32_t writer_id = 0;
};

inline bool entry_less(const StigmergyEntry& a, const StigmergyEntry& b) {
  return std::pair{a.lamport, a.writer_id} < std::pair{b.lamport, b.writer_id};
}

inline bool entry_equal_order(const StigmergyEntry& a, const StigmergyEntry& b) {
  return a.lamport == b.lamport && a.writer_id == b.writer_id;
}

struct OpCounters {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

// Logical map identifiers: each scalar field lives in its own stigmergy.
namespace maps {
inline constexpr std::uint8_t kRadiation = 0;
inline constexpr std::uint8_t kVisit = 1;
}  // namespace maps

// One robot's replica of one belief map. The table always holds, per key, the
// greatest entry (by (lamport, writer_id)) ever written locally or received.
struct StigmergyReplica {
  std::uint32_t robot_id = 0;
  std::uint8_t map_id = 0;
  std::uint64_t clock = 0;  // Lamport counter: bumped on write, max-merged on receive
  std::unordered_map<std::uint64_t, StigmergyEntry> table;
  OpCounters ops;  // per-tick, harvested by account()
  // anti-entropy corrections already sent since the last account(); a given
  // entry is re-announced at most once per tick no matter how many stale
  // copies arrive
  std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint32_t>> corrections_sent;
};

enum class MsgKind : std::uint8_t { write_update, read_reply, read_query };

struct BusMessage {
  std::uint32_t sender = 0;
  std::uint8_t map_id = 0;
  MsgKind kind = MsgKind::write_update;
  StigmergyEntry entry;
  Vec2 sender_pos_cells;  // for optional range-limited delivery
};

// Simulated lossy broadcast medium. Messages accumulate during a tick and are
// delivered by flush(); a dropped message reaches nobody but is still paid for.
struct BroadcastBus {
  double drop_probability = 0.0;
  std::uint32_t message_bytes = 20;  // accounting constant per message
  int max_rounds = 4;                // anti-entropy rounds per flush
  double comm_radius_cells = 0.0;    // 0 = full-swarm connectivity
  Vec2 current_sender_pos;           // stamped onto outgoing messages
  std::vector<BusMessage> pending;
};

inline void send_message(BroadcastBus& bus, StigmergyReplica& sender,
                         MsgKind kind, const StigmergyEntry& entry) {
  sender.ops.messages += 1;
  sender.ops.bytes += bus.message_bytes;
  bus.pending.push_back(
      {sender.robot_id, sender.map_id, kind, entry, bus.current_sender_pos});
}

// Local table lookup without read accounting or propagation. Used for a
// robot's own current cell, whose value is its latest local observation.
inline std::optional<double> peek(const StigmergyReplica& rep, CellCoord key) {
  auto it = rep.table.find(pack_cell(key));
  if (it == rep.table.end()) return std::nullopt;
  return it->second.value;
}

// Write: a fresh key stores the value as-is; overwriting a key already present
// (from a previous step) merges with an arithmetic average. The resulting
// entry is broadcast. Same-tick collisions between writers never average;
// they resolve at delivery by the highest-writer rule.
inline void vput(StigmergyReplica& rep, CellCoord key, double value,
                 BroadcastBus& bus) {
  const std::uint64_t k = pack_cell(key);
  double stored = value;
  if (auto it = rep.table.find(k); it != rep.table.end()) {
    stored = 0.5 * (it->second.value + value);
    rep.clock = std::max(rep.clock, it->second.lamport);
  }
  rep.clock += 1;
  const StigmergyEntry e{key, stored, rep.clock, rep.robot_id};
  rep.table[k] = e;
  rep.ops.writes += 1;
  send_message(bus, rep, MsgKind::write_update, e);
}

// Read: every read is shared. A hit re-broadcasts the locally stored entry so
// stale peers get repaired (and newer peers can talk back); a miss broadcasts
// a query so any peer holding the key answers.
inline std::optional<double> vget(StigmergyReplica& rep, CellCoord key,
                                  BroadcastBus& bus) {
  rep.ops.reads += 1;
  auto it = rep.table.find(pack_cell(key));
  if (it == rep.table.end()) {
    send_message(bus, rep, MsgKind::read_query,
                 StigmergyEntry{key, 0.0, 0, rep.robot_id});
    return std::nullopt;
  }
  send_message(bus, rep, MsgKind::read_reply, it->second);
  return it->second.value;
}

// Answer a peer that announced an older entry (or asked for one we hold), at
// most once per entry per tick.
inline void send_correction(StigmergyReplica& rep, const StigmergyEntry& local,
                            BroadcastBus& bus) {
  if (rep.corrections_sent
          .emplace(pack_cell(local.key), local.lamport, local.writer_id)
          .second) {
    send_message(bus, rep, MsgKind::write_update, local);
  }
}

// Merge an incoming message: newer (lamport, writer_id) wins; duplicates are
// no-ops. Anti-entropy is read-driven: a query for a key we hold, or a stale
// read announcement, draws the newer entry back out. A stale concurrent write
// just loses the merge (its writer is receiving the winning entry on the same
// bus). Queries carry no data and are never stored.
inline void on_message(StigmergyReplica& rep, const StigmergyEntry& incoming,
                       BroadcastBus& bus,
                       MsgKind kind = MsgKind::write_update) {
  const std::uint64_t k = pack_cell(incoming.key);
  auto it = rep.table.find(k);
  if (kind == MsgKind::read_query) {
    if (it != rep.table.end()) send_correction(rep, it->second, bus);
    return;
  }
  rep.clock = std::max(rep.clock, incoming.lamport);
  if (it == rep.table.end()) {
    rep.table.emplace(k, incoming);
    return;
  }
  StigmergyEntry& local = it->second;
  if (entry_less(local, incoming)) {
    local = incoming;
  } else if (!entry_equal_order(local, incoming) &&
             kind == MsgKind::read_reply) {
    send_correction(rep, local, bus);
  }
}

struct ReplicaEndpoint {
  StigmergyReplica* replica = nullptr;
  Vec2 position_cells;
};

struct FlushReport {
  std::uint64_t delivered = 0;  // per-recipient deliveries
  std::uint64_t dropped = 0;    // messages lost (or left over past max_rounds)
  std::uint64_t bytes = 0;      // message_bytes per processed message
  int rounds = 0;
};

// Deliver everything pending to every other endpoint of the same map, in
// message order, each message independently lost with drop_probability.
// Anti-entropy replies generated during delivery go out in the next round,
// up to max_rounds; stragglers past that are discarded (future reads
// re-trigger repair).
inline FlushReport flush(BroadcastBus& bus,
                         std::span<const ReplicaEndpoint> endpoints,
                         RandomStream& rng) {
  FlushReport report;
  std::vector<BusMessage> batch;
  // identical frames (same map, key, lamport, writer carry the same value)
  // are coalesced per round
  std::set<std::tuple<std::uint8_t, std::uint64_t, std::uint64_t, std::uint32_t>>
      seen;
  for (int round = 0; round < bus.max_rounds && !bus.pending.empty(); ++round) {
    report.rounds += 1;
    batch.clear();
    std::swap(batch, bus.pending);
    seen.clear();
    for (const BusMessage& m : batch) {
      if (!seen.emplace(m.map_id, pack_cell(m.entry.key), m.entry.lamport,
                        m.entry.writer_id)
               .second) {
        continue;
      }
      report.bytes += bus.message_bytes;
      const bool dropped =
          bus.drop_probability >= 1.0 ||
          (bus.drop_probability > 0.0 && rng.uniform01() < bus.drop_probability);
      if (dropped) {
        report.dropped += 1;
        continue;
      }
      for (const ReplicaEndpoint& ep : endpoints) {
        if (ep.replica->map_id != m.map_id || ep.replica->robot_id == m.sender) {
          continue;
        }
        if (bus.comm_radius_cells > 0.0 &&
            distance(m.sender_pos_cells, ep.position_cells) >
                bus.comm_radius_cells) {
          continue;
        }
        bus.current_sender_pos = ep.position_cells;
        on_message(*ep.replica, m.entry, bus, m.kind);
        report.delivered += 1;
      }
    }
  }
  report.dropped += bus.pending.size();
  bus.pending.clear();
  return report;
}

// Harvest and reset the per-tick counters.
inline OpCounters account(StigmergyReplica& rep) {
  const OpCounters out = rep.ops;
  rep.ops = {};
  rep.corrections_sent.clear();
  return out;
}

// Table snapshot in deterministic (x, y) key order.
inline std::vector<StigmergyEntry> sorted_entries(const StigmergyReplica& rep) {
  std::vector<StigmergyEntry> entries;
  entries.reserve(rep.table.size());
  for (const auto& [key, e] : rep.table) entries.push_back(e);
  std::sort(entries.begin(), entries.end(),
            [](const StigmergyEntry& a, const StigmergyEntry& b) {
              return std::pair{a.key.x, a.key.y} < std::pair{b.key.x, b.key.y};
            });
  return entries;
}

}  // namespace dora
