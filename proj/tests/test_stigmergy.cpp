#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dora/io.hpp"
#include "dora/rng.hpp"
#include "dora/stigmergy.hpp"

namespace {

using namespace dora;

std::string table_string(const StigmergyReplica& rep) { return replica_csv(rep); }

std::vector<ReplicaEndpoint> endpoints_of(std::vector<StigmergyReplica>& reps) {
  std::vector<ReplicaEndpoint> eps;
  for (auto& r : reps) eps.push_back({&r, {}});
  return eps;
}

TEST(Vput, FirstWriteStoresValue) {
  StigmergyReplica rep{3, 0, 0, {}, {}};
  BroadcastBus bus;
  vput(rep, {2, 5}, 0.4, bus);
  EXPECT_DOUBLE_EQ(peek(rep, {2, 5}).value(), 0.4);
  EXPECT_EQ(rep.ops.writes, 1u);
  ASSERT_EQ(bus.pending.size(), 1u);
  EXPECT_EQ(bus.pending[0].entry.lamport, 1u);
  EXPECT_EQ(bus.pending[0].entry.writer_id, 3u);
}

TEST(Vput, OverwriteMergesWithAverage) {
  StigmergyReplica rep{0, 0, 0, {}, {}};
  BroadcastBus bus;
  vput(rep, {1, 1}, 0.2, bus);
  vput(rep, {1, 1}, 0.4, bus);
  EXPECT_DOUBLE_EQ(peek(rep, {1, 1}).value(), 0.3);
  // lamport strictly increased
  EXPECT_EQ(rep.table.at(pack_cell({1, 1})).lamport, 2u);
}

TEST(Vput, SameTickCollisionResolvesToHighestWriter) {
  std::vector<StigmergyReplica> reps{{3, 0, 0, {}, {}},
                                     {7, 0, 0, {}, {}},
                                     {1, 0, 0, {}, {}}};
  BroadcastBus bus;
  RandomStream rng(1);
  vput(reps[0], {4, 4}, 0.1, bus);  // robot 3, lamport 1
  vput(reps[1], {4, 4}, 0.9, bus);  // robot 7, lamport 1
  auto eps = endpoints_of(reps);
  flush(bus, eps, rng);
  for (const auto& rep : reps) {
    EXPECT_DOUBLE_EQ(peek(rep, {4, 4}).value(), 0.9) << "robot " << rep.robot_id;
  }
}

TEST(Vget, MissingKeyReturnsNothingAndBroadcastsQuery) {
  StigmergyReplica rep{4, 0, 0, {}, {}};
  BroadcastBus bus;
  EXPECT_FALSE(vget(rep, {9, 9}, bus).has_value());
  EXPECT_EQ(rep.ops.reads, 1u);
  ASSERT_EQ(bus.pending.size(), 1u);
  EXPECT_EQ(bus.pending[0].kind, MsgKind::read_query);
  EXPECT_EQ(bus.pending[0].entry.lamport, 0u);
}

TEST(Vget, QueryDrawsTheEntryOutOfPeers) {
  std::vector<StigmergyReplica> reps{{0, 0, 0, {}, {}}, {1, 0, 0, {}, {}}};
  BroadcastBus bus;
  BroadcastBus scratch;
  RandomStream rng(1);
  vput(reps[1], {3, 3}, 0.6, scratch);  // robot 1 knows the key privately
  EXPECT_FALSE(vget(reps[0], {3, 3}, bus).has_value());  // miss -> query
  auto eps = endpoints_of(reps);
  flush(bus, eps, rng);  // query delivered, answer delivered next round
  EXPECT_DOUBLE_EQ(peek(reps[0], {3, 3}).value(), 0.6);
}

TEST(Vget, ReadYourWrites) {
  StigmergyReplica rep{0, 0, 0, {}, {}};
  BroadcastBus bus;
  vput(rep, {1, 0}, 0.3, bus);
  EXPECT_DOUBLE_EQ(vget(rep, {1, 0}, bus).value(), 0.3);
  EXPECT_EQ(bus.pending.size(), 2u);  // the write and the read both broadcast
}

TEST(Vget, SeesRemoteWriteAfterDelivery) {
  std::vector<StigmergyReplica> reps{{0, 0, 0, {}, {}}, {1, 0, 0, {}, {}}};
  BroadcastBus bus;
  RandomStream rng(1);
  vput(reps[0], {2, 2}, 0.7, bus);
  auto eps = endpoints_of(reps);
  flush(bus, eps, rng);
  EXPECT_DOUBLE_EQ(vget(reps[1], {2, 2}, bus).value(), 0.7);
}

TEST(OnMessage, NewerWinsOlderReadTriggersAntiEntropy) {
  StigmergyReplica rep{0, 0, 0, {}, {}};
  BroadcastBus bus;
  on_message(rep, {{1, 1}, 0.5, 5, 2}, bus);
  EXPECT_DOUBLE_EQ(peek(rep, {1, 1}).value(), 0.5);
  EXPECT_TRUE(bus.pending.empty());

  // newer lamport adopted
  on_message(rep, {{1, 1}, 0.8, 7, 1}, bus);
  EXPECT_DOUBLE_EQ(peek(rep, {1, 1}).value(), 0.8);
  EXPECT_TRUE(bus.pending.empty());

  // a stale concurrent write just loses the merge
  on_message(rep, {{1, 1}, 0.1, 3, 9}, bus, MsgKind::write_update);
  EXPECT_DOUBLE_EQ(peek(rep, {1, 1}).value(), 0.8);
  EXPECT_TRUE(bus.pending.empty());

  // a stale read announcement draws the newer entry back out
  on_message(rep, {{1, 1}, 0.1, 3, 9}, bus, MsgKind::read_reply);
  EXPECT_DOUBLE_EQ(peek(rep, {1, 1}).value(), 0.8);
  ASSERT_EQ(bus.pending.size(), 1u);
  EXPECT_EQ(bus.pending[0].entry.lamport, 7u);
}

TEST(OnMessage, QueriesNeverCreateEntries) {
  StigmergyReplica rep{0, 0, 0, {}, {}};
  BroadcastBus bus;
  on_message(rep, {{2, 2}, 0.0, 0, 5}, bus, MsgKind::read_query);
  EXPECT_TRUE(rep.table.empty());
  EXPECT_TRUE(bus.pending.empty());  // nothing to answer with
}

TEST(OnMessage, EqualLamportHigherWriterWins) {
  StigmergyReplica rep{0, 0, 0, {}, {}};
  BroadcastBus bus;
  on_message(rep, {{1, 1}, 0.1, 4, 3}, bus);
  on_message(rep, {{1, 1}, 0.9, 4, 7}, bus);
  EXPECT_DOUBLE_EQ(peek(rep, {1, 1}).value(), 0.9);
  EXPECT_TRUE(bus.pending.empty());
}

TEST(OnMessage, DuplicateDeliveryIsNoOp) {
  StigmergyReplica rep{0, 0, 0, {}, {}};
  BroadcastBus bus;
  const StigmergyEntry e{{2, 3}, 0.6, 4, 1};
  on_message(rep, e, bus);
  const std::string before = table_string(rep);
  on_message(rep, e, bus);
  EXPECT_EQ(table_string(rep), before);
  EXPECT_TRUE(bus.pending.empty());
}

TEST(Flush, FullBroadcastReachesEveryOtherRobot) {
  std::vector<StigmergyReplica> reps;
  for (std::uint32_t i = 0; i < 10; ++i) reps.push_back({i, 0, 0, {}, {}});
  BroadcastBus bus;
  RandomStream rng(1);
  vput(reps[0], {1, 1}, 0.5, bus);
  auto eps = endpoints_of(reps);
  const FlushReport rep = flush(bus, eps, rng);
  EXPECT_EQ(rep.delivered, 9u);
  EXPECT_EQ(rep.dropped, 0u);
  EXPECT_EQ(rep.bytes, 20u);
}

TEST(Flush, FullLossDeliversNothing) {
  std::vector<StigmergyReplica> reps{{0, 0, 0, {}, {}}, {1, 0, 0, {}, {}}};
  BroadcastBus bus;
  bus.drop_probability = 1.0;
  RandomStream rng(1);
  vput(reps[0], {1, 1}, 0.5, bus);
  vput(reps[0], {2, 2}, 0.5, bus);
  auto eps = endpoints_of(reps);
  const FlushReport rep = flush(bus, eps, rng);
  EXPECT_EQ(rep.delivered, 0u);
  EXPECT_EQ(rep.dropped, 2u);
  EXPECT_FALSE(peek(reps[1], {1, 1}).has_value());
}

TEST(Flush, DropRateMatchesBinomial) {
  const int messages = 1000;
  std::vector<StigmergyReplica> reps{{0, 0, 0, {}, {}}, {1, 0, 0, {}, {}}};
  BroadcastBus bus;
  bus.drop_probability = 0.5;
  bus.max_rounds = 1;  // no anti-entropy follow-ups in this count
  RandomStream rng(7);
  for (int i = 0; i < messages; ++i) {
    vput(reps[0], {i % 40, i / 40}, 0.5, bus);
  }
  auto eps = endpoints_of(reps);
  const FlushReport rep = flush(bus, eps, rng);
  const double dropped = static_cast<double>(rep.dropped) / messages;
  const double sigma = std::sqrt(0.25 / messages);
  EXPECT_NEAR(dropped, 0.5, 3.0 * sigma);
}

TEST(Flush, RangeLimitedDelivery) {
  std::vector<StigmergyReplica> reps{{0, 0, 0, {}, {}},
                                     {1, 0, 0, {}, {}},
                                     {2, 0, 0, {}, {}}};
  BroadcastBus bus;
  bus.comm_radius_cells = 3.0;
  RandomStream rng(1);
  bus.current_sender_pos = {0.0, 0.0};
  vput(reps[0], {0, 0}, 0.5, bus);
  std::vector<ReplicaEndpoint> eps{{&reps[0], {0.0, 0.0}},
                                   {&reps[1], {2.0, 0.0}},
                                   {&reps[2], {10.0, 0.0}}};
  flush(bus, eps, rng);
  EXPECT_TRUE(peek(reps[1], {0, 0}).has_value());
  EXPECT_FALSE(peek(reps[2], {0, 0}).has_value());
}

TEST(Account, ReturnsAndResetsCounters) {
  StigmergyReplica rep{0, 0, 0, {}, {}};
  BroadcastBus bus;
  vput(rep, {1, 1}, 0.5, bus);
  (void)vget(rep, {1, 1}, bus);
  (void)vget(rep, {2, 2}, bus);
  const OpCounters ops = account(rep);
  EXPECT_EQ(ops.writes, 1u);
  EXPECT_EQ(ops.reads, 2u);
  EXPECT_EQ(ops.bytes, 60u);  // every access ships one message: write, reply, query
  const OpCounters again = account(rep);
  EXPECT_EQ(again.reads, 0u);
  EXPECT_EQ(again.writes, 0u);
  EXPECT_EQ(again.bytes, 0u);
}

// Eventual consistency: any write schedule followed by one lossless flush
// leaves all replicas byte-identical.
TEST(Convergence, RandomSchedulesConvergeAfterQuiescentFlush) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    RandomStream rng(derive_seed(2000, seed));
    const int n_robots = 2 + static_cast<int>(rng.uniform_below(9));   // 2..10
    const int n_keys = 1 + static_cast<int>(rng.uniform_below(20));    // 1..20
    const int n_events = 1 + static_cast<int>(rng.uniform_below(60));  // 1..60
    std::vector<StigmergyReplica> reps;
    for (int i = 0; i < n_robots; ++i) {
      reps.push_back({static_cast<std::uint32_t>(i), 0, 0, {}, {}});
    }
    BroadcastBus bus;
    RandomStream net(derive_seed(3000, seed));
    auto eps = endpoints_of(reps);
    for (int e = 0; e < n_events; ++e) {
      const int who = static_cast<int>(rng.uniform_below(n_robots));
      const std::int32_t key = static_cast<std::int32_t>(rng.uniform_below(n_keys));
      vput(reps[static_cast<std::size_t>(who)], {key, 0}, rng.uniform01(), bus);
      if (rng.uniform01() < 0.3) flush(bus, eps, net);
    }
    flush(bus, eps, net);  // quiescent: no new writes afterwards
    const std::string first = table_string(reps[0]);
    for (const auto& rep : reps) {
      ASSERT_EQ(table_string(rep), first) << "seed " << seed;
    }
  }
}

// Protocol-level merge: delivering any batch of entries in any order, with a
// duplicate injected, lands every replica on the same table.
TEST(Convergence, DeliveryOrderAndDuplicatesIrrelevant) {
  std::vector<StigmergyEntry> pool;
  for (std::uint64_t lamport : {1u, 2u}) {
    for (std::uint32_t writer : {1u, 2u, 3u}) {
      for (std::int32_t key : {0, 1, 2}) {
        pool.push_back({{key, 0},
                        0.1 * static_cast<double>(lamport + writer + key),
                        lamport, writer});
      }
    }
  }
  RandomStream pick(17);
  for (int instance = 0; instance < 150; ++instance) {
    std::vector<StigmergyEntry> batch;
    for (int i = 0; i < 3; ++i) {
      batch.push_back(pool[pick.uniform_below(static_cast<std::uint32_t>(pool.size()))]);
    }
    batch.push_back(batch[pick.uniform_below(3)]);  // duplicate

    std::vector<int> order{0, 1, 2, 3};
    std::string expected;
    std::sort(order.begin(), order.end());
    do {
      StigmergyReplica rep{9, 0, 0, {}, {}};
      BroadcastBus bus;
      for (int idx : order) {
        on_message(rep, batch[static_cast<std::size_t>(idx)], bus);
      }
      const std::string got = table_string(rep);
      if (expected.empty()) {
        expected = got;
      } else {
        ASSERT_EQ(got, expected) << "instance " << instance;
      }
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

// Under 50% loss, read-triggered anti-entropy repairs divergence.
TEST(Convergence, LossyBusConvergesThroughReads) {
  std::vector<StigmergyReplica> reps;
  for (std::uint32_t i = 0; i < 4; ++i) reps.push_back({i, 0, 0, {}, {}});
  BroadcastBus bus;
  bus.drop_probability = 0.5;
  RandomStream net(41);
  RandomStream rng(42);
  auto eps = endpoints_of(reps);
  const int n_keys = 10;
  for (int t = 0; t < 50; ++t) {
    for (auto& rep : reps) {
      vput(rep, {static_cast<std::int32_t>(rng.uniform_below(n_keys)), 0},
           rng.uniform01(), bus);
    }
    flush(bus, eps, net);
  }
  for (int t = 0; t < 30; ++t) {
    for (auto& rep : reps) {
      for (std::int32_t k = 0; k < n_keys; ++k) {
        (void)vget(rep, {k, 0}, bus);
      }
    }
    flush(bus, eps, net);
  }
  const std::string first = table_string(reps[0]);
  for (const auto& rep : reps) EXPECT_EQ(table_string(rep), first);
}

}  // namespace
