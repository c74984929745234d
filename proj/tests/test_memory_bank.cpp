// Copyright 2026 The hmod Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hmod/memory_bank.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hmod/archive.hpp"
#include "hmod/error.hpp"

using namespace hmod;

namespace {

TEST(MemoryBankTest, InitializesZerosAtStartTime) {
  MemoryBank bank(3, 4, 8, 0.0);
  EXPECT_EQ(bank.level_count(), 5u);
  for (NodeId i = 0; i < 3; ++i) {
    const auto levels = bank.read_all_levels(i);
    ASSERT_EQ(levels.size(), 5u);
    for (std::size_t d = 0; d < 5; ++d) {
      EXPECT_EQ(levels[d].size(), 8u);
      for (double v : levels[d]) EXPECT_EQ(v, 0.0);
      EXPECT_EQ(bank.last_update(i, d), 0.0);
    }
  }
}

TEST(MemoryBankTest, LevelSpansAreDyadic) {
  MemoryBank bank(1, 4, 2, 0.0, 0, 1800.0);
  EXPECT_EQ(bank.level_span(0), 1800.0);
  EXPECT_EQ(bank.level_span(1), 1800.0);
  EXPECT_EQ(bank.level_span(2), 3600.0);
  EXPECT_EQ(bank.level_span(3), 7200.0);
  EXPECT_EQ(bank.level_span(4), 14400.0);
}

TEST(MemoryBankTest, WriteReadAndLevelOrder) {
  MemoryBank bank(2, 2, 3, 0.0);
  bank.write(1, 2, std::vector<double>{1, 2, 3}, 5.0);
  bank.write(1, 0, std::vector<double>{7, 8, 9}, 5.0);
  const auto got = bank.read(1, 2);
  EXPECT_EQ(std::vector<double>(got.begin(), got.end()), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(bank.last_update(1, 2), 5.0);
  const auto all = bank.read_all_levels(1);
  EXPECT_EQ(all[0][0], 7.0);
  EXPECT_EQ(all[1][0], 0.0);
  EXPECT_EQ(all[2][2], 3.0);
  EXPECT_EQ(bank.read(0, 2)[0], 0.0);
}

TEST(MemoryBankTest, RejectsTimeRegressionAndBadShapes) {
  MemoryBank bank(2, 1, 2, 0.0);
  bank.write(0, 0, std::vector<double>{1, 1}, 5.0);
  try {
    bank.write(0, 0, std::vector<double>{1, 1}, 3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kState);
  }
  EXPECT_THROW(bank.write(0, 0, std::vector<double>{1}, 6.0), Error);
  EXPECT_THROW(bank.read(2, 0), Error);
  EXPECT_THROW(bank.read(0, 2), Error);
}

TEST(MemoryBankTest, SnapshotRestoreIsExact) {
  MemoryBank bank(3, 2, 4, 10.0, 4);
  bank.write(2, 1, std::vector<double>{1, 2, 3, 4}, 11.0);
  const auto before = bank.snapshot();
  EXPECT_EQ(before, bank.snapshot());
  bank.write(0, 0, std::vector<double>{9, 9, 9, 9}, 20.0);
  bank.store_message(0, 0, std::vector<double>{1, 1, 1, 1});
  EXPECT_NE(before, bank.snapshot());
  bank.restore(before);
  EXPECT_EQ(before, bank.snapshot());
  EXPECT_EQ(bank.last_update(0, 0), 10.0);

  MemoryBank other(3, 3, 4, 0.0, 4);
  EXPECT_THROW(other.restore(before), Error);
}

TEST(MemoryBankTest, FiniteCheck) {
  MemoryBank bank(1, 0, 2, 0.0);
  EXPECT_TRUE(bank.all_finite());
  bank.write(0, 0, std::vector<double>{1, std::numeric_limits<double>::infinity()}, 1.0);
  EXPECT_FALSE(bank.all_finite());
}

TEST(MemoryBankTest, ArchiveRoundTrip) {
  MemoryBank bank(2, 1, 3, 0.0, 2, 900.0);
  bank.write(1, 1, std::vector<double>{0.5, -1, 2}, 900.0);
  bank.store_message(1, 1, std::vector<double>{3, 4});
  TensorArchive a;
  bank.save_to(a);
  const auto back = MemoryBank::load_from(a);
  EXPECT_EQ(back.snapshot(), bank.snapshot());
  EXPECT_EQ(back.delta_t(), 900.0);
}

}  // namespace
