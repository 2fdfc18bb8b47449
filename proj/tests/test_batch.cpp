#include <gtest/gtest.h>

#include <stdexcept>

#include "rsde/sim/batch.hpp"

TEST(Batch, ResultsIndexedByTask) {
    for (std::size_t workers : {1u, 2u, 5u}) {
        const auto out = rsde::sim::run_batch(1000, workers, [](std::size_t i) { return i * i; });
        ASSERT_EQ(out.size(), 1000u);
        for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
    }
}

TEST(Batch, EmptyBatch) {
    const auto out = rsde::sim::run_batch(0, 4, [](std::size_t i) { return i; });
    EXPECT_TRUE(out.empty());
}

TEST(Batch, RethrowsSmallestFailingIndex) {
    for (std::size_t workers : {1u, 3u}) {
        try {
            rsde::sim::run_batch(500, workers, [](std::size_t i) -> int {
                if (i == 77 || i == 300 || i == 499) throw std::runtime_error(std::to_string(i));
                return 0;
            });
            FAIL() << "expected a throw";
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "77");
        }
    }
}
