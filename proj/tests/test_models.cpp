#include <gtest/gtest.h>

#include "collage/decoder.hpp"
#include "collage/errors.hpp"
#include "collage/mock_models.hpp"

using namespace collage;

TEST(MockClassify, PerfectAndHopeless) {
  Prng p(3);
  for (int i = 0; i < 1000; ++i) {
    const int truth = i % 10;
    EXPECT_EQ(mock_classify(truth, 1.0, 10, p), truth);
    const int wrong = mock_classify(truth, 0.0, 10, p);
    EXPECT_NE(wrong, truth);
    EXPECT_GE(wrong, 0);
    EXPECT_LT(wrong, 10);
  }
}

TEST(MockClassify, EmpiricalAccuracy) {
  Prng p(42);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += mock_classify(i % 10, 0.8, 10, p) == i % 10;
  EXPECT_NEAR(hits / 100000.0, 0.8, 0.01);
}

TEST(MockClassify, AlwaysConsumesTwoUniforms) {
  Prng a(8), b(8);
  mock_classify(0, 1.0, 5, a);
  b.uniform();
  b.uniform();
  EXPECT_EQ(a.state(), b.state());
}

TEST(MockClassify, WrongClassesCoverAllOthers) {
  Prng p(1);
  std::array<int, 4> seen{};
  for (int i = 0; i < 4000; ++i) ++seen[mock_classify(2, 0.0, 4, p)];
  EXPECT_EQ(seen[2], 0);
  for (int k : {0, 1, 3}) EXPECT_GT(seen[k], 1100);
}

TEST(MockClassify, Errors) {
  Prng p(1);
  EXPECT_THROW(mock_classify(0, 0.5, 1, p), DomainError);
  EXPECT_THROW(mock_classify(5, 0.5, 5, p), DomainError);
}

TEST(MockCollageBoxes, AllMissed) {
  Prng p(1);
  MockModelParams params;
  params.p_miss = 1.0;
  const std::vector<int> truths(9, 1);
  EXPECT_TRUE(mock_collage_boxes(truths, params, GridSpec(3), p).empty());
}

TEST(MockCollageBoxes, PerfectModelDecodesToTruths) {
  MockModelParams params;
  params.acc_collage = 1.0;
  params.p_miss = 0.0;
  params.box_jitter = 0.0;
  Prng p(10);
  for (std::size_t s = 1; s <= 5; ++s) {
    const GridSpec g(s);
    std::vector<int> truths;
    for (std::size_t i = 0; i < g.cells(); ++i) truths.push_back(int(i % 10));
    const auto dc = decode_collage(mock_collage_boxes(truths, params, g, p), g);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      ASSERT_TRUE(dc.slots[i]);
      EXPECT_EQ(dc.slots[i]->class_id, truths[i]);
    }
  }
}

TEST(MockCollageBoxes, JitteredBoxesStayInTheirCell) {
  MockModelParams params;
  params.acc_collage = 1.0;
  params.box_jitter = 0.49;
  Prng p(12);
  const GridSpec g(4);
  std::vector<int> truths(16);
  for (int k = 0; k < 500; ++k) {
    for (auto& t : truths) t = draw_truth(10, p);
    const auto dc = decode_collage(mock_collage_boxes(truths, params, g, p), g);
    for (std::size_t i = 0; i < g.cells(); ++i) ASSERT_EQ(dc.slots[i]->class_id, truths[i]);
  }
}

TEST(MockCollageBoxes, MeanBoxesWithMisses) {
  MockModelParams params;
  params.p_miss = 0.1;
  Prng p(2024);
  const std::vector<int> truths(9, 0);
  std::size_t total = 0;
  for (int k = 0; k < 10000; ++k) total += mock_collage_boxes(truths, params, GridSpec(3), p).size();
  EXPECT_NEAR(double(total) / 10000.0, 8.1, 0.1);
}

TEST(MockCollageBoxes, FixedDrawsPerCell) {
  MockModelParams params;
  params.p_miss = 0.5;
  Prng a(4), b(4);
  const std::vector<int> truths(4, 0);
  mock_collage_boxes(truths, params, GridSpec(2), a);
  for (std::size_t i = 0; i < 4 * kCollageDrawsPerCell; ++i) b.uniform();
  EXPECT_EQ(a.state(), b.state());
}

TEST(MockCollageBoxes, ArityError) {
  Prng p(1);
  EXPECT_THROW(mock_collage_boxes(std::vector<int>(3, 0), MockModelParams{}, GridSpec(2), p), ArityError);
}

TEST(Accuracy, Counting) {
  const std::vector<int> truths{1, 2, 3, 4};
  const std::vector<ServedAnswer> all{{Source::Single, 1}, {Source::Single, 2}, {Source::Collage, 3}, {Source::Reissue, 4}};
  EXPECT_EQ(end_to_end_accuracy(all, truths).accuracy, 1.0);
  const std::vector<ServedAnswer> half{{Source::Single, 1}, {Source::Single, 0}, {Source::Collage, 3}, {Source::Collage, 0}};
  const auto r = end_to_end_accuracy(half, truths);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.source_accuracy(Source::Collage), 0.5);
  EXPECT_EQ(r.source_fraction(Source::Single), 0.5);
  EXPECT_EQ(r.source_accuracy(Source::Reissue), 0.0);
  double recomposed = 0;
  for (Source s : {Source::Single, Source::Collage, Source::Reissue})
    recomposed += r.source_fraction(s) * r.source_accuracy(s);
  EXPECT_NEAR(recomposed, r.accuracy, 1e-12);
}

TEST(Accuracy, LengthMismatch) {
  EXPECT_THROW(end_to_end_accuracy(std::vector<ServedAnswer>(2), std::vector<int>(3)), DomainError);
}
