/* Copyright 2026 The ptperf Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ptperf/arch.h"

#include <string>

#include "gtest/gtest.h"
#include "test_util.h"

namespace ptperf {
namespace {

using ::ptperf::testing::Find;
using ::ptperf::testing::Plan;
using ::ptperf::testing::TinyDense;
using ::ptperf::testing::TinyMoe;

TEST(DecomposeTest, QkvFlopsAtLargeShape) {
  ModelArchitecture m = TinyDense();
  m.seq_len = 4096;
  m.hidden = 8192;
  m.heads = 64;
  m.dense_ffn = 28672;
  auto dec = Decompose(m, Plan(1, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(dec);
  const double expected = 6.0 * 1 * 4096 * 8192.0 * 8192.0;
  EXPECT_DOUBLE_EQ(Find(*dec, ModuleRole::kQkv)->flops_fwd, expected);
  EXPECT_NEAR(expected, 1.649e12, 1e9);
}

TEST(DecomposeTest, DenseMlpRows) {
  auto dec = Decompose(TinyDense(), Plan(1, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(dec);
  EXPECT_EQ(Find(*dec, ModuleRole::kMlpLinear1)->flops_fwd, 256);
  EXPECT_EQ(Find(*dec, ModuleRole::kSwiglu)->flops_fwd, 16);
  EXPECT_EQ(Find(*dec, ModuleRole::kMlpLinear2)->flops_fwd, 128);
}

TEST(DecomposeTest, ZeroBatchIsAllZero) {
  auto dec = Decompose(TinyDense(), Plan(1, 1, 1, 1, 1, 0, 1, 1));
  ASSERT_OK(dec);
  for (const ModuleShape& m : dec->layer) {
    EXPECT_EQ(m.flops_fwd, 0) << m.name;
    EXPECT_EQ(m.act_bytes, 0) << m.name;
  }
}

TEST(DecomposeTest, ActivationRows) {
  auto dec = Decompose(TinyDense(), Plan(1, 1, 1, 1, 1, 1, 1, 1), 2.0);
  ASSERT_OK(dec);
  EXPECT_EQ(Find(*dec, ModuleRole::kQkv)->act_bytes, 32);
  ModelArchitecture m = TinyDense();
  m.seq_len = 3;
  dec = Decompose(m, Plan(1, 1, 1, 1, 1, 1, 1, 1), 2.0);
  ASSERT_OK(dec);
  EXPECT_EQ(Find(*dec, ModuleRole::kSoftmax)->act_bytes, 36);
}

TEST(DecomposeTest, ZeroSequenceHasNoActivations) {
  ModelArchitecture m = TinyDense();
  m.seq_len = 0;
  auto bytes = ActivationBytesPerLayer(m, Plan(1, 1, 1, 1, 1, 1, 1, 1), 2.0);
  ASSERT_OK(bytes);
  EXPECT_EQ(*bytes, 0);
}

TEST(DecomposeTest, EmbeddingAndHead) {
  auto dec = Decompose(TinyDense(), Plan(1, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(dec);
  EXPECT_EQ(dec->embedding.flops_fwd, 1 * 2 * 4);
  EXPECT_EQ(dec->head.flops_fwd, 2 * 1 * 2 * 4 * 16);
}

TEST(DecomposeTest, ModuleNames) {
  auto dec = Decompose(TinyDense(), Plan(1, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(dec);
  std::string names;
  for (const ModuleShape& m : dec->layer) names += m.name + ",";
  EXPECT_EQ(names,
            "norm,qkv,attention-map,softmax,attention-on-value,o-projection,"
            "norm,mlp-linear-1,swiglu,mlp-linear-2,");
}

TEST(DecomposeTest, ShapeErrorNamesDimension) {
  auto dec = Decompose(TinyDense(), Plan(3, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_FALSE(dec.ok());
  EXPECT_NE(dec.status().message().find("shape error"), std::string::npos);
  EXPECT_NE(dec.status().message().find("h="), std::string::npos);
}

TEST(DecomposeTest, ExpertCountMustDivideByE) {
  auto dec = Decompose(TinyMoe(1), Plan(1, 1, 1, 3, 1, 1, 1, 1));
  ASSERT_FALSE(dec.ok());
  EXPECT_NE(dec.status().message().find("n_experts"), std::string::npos);
}

TEST(LayerFlopsTest, SumOfModules) {
  auto dec = Decompose(TinyDense(), Plan(1, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(dec);
  double sum = 0;
  for (const ModuleShape& m : dec->layer) sum += m.flops_fwd;
  auto total = LayerFlopsTotal(TinyDense(), Plan(1, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(total);
  EXPECT_EQ(*total, sum);
  // b=1, s=2, h=4, g_d=8: norm 8 + qkv 192 + map 32 + softmax 0 + av 32
  // + o 64 + norm 8 + mlp 256 + 16 + 128.
  EXPECT_EQ(*total, 8 + 192 + 32 + 0 + 32 + 64 + 8 + 256 + 16 + 128);
}

TEST(LayerFlopsTest, Singleton) {
  const ModuleShape one{"x", ModuleRole::kNorm, 7, 0, 0, false};
  EXPECT_EQ(SumFlops(std::span<const ModuleShape>(&one, 1)), 7);
}

TEST(LayerFlopsTest, TopKDoublesExpertFlops) {
  auto one = Decompose(TinyMoe(1), Plan(1, 1, 1, 1, 1, 1, 1, 1));
  auto two = Decompose(TinyMoe(2), Plan(1, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(one);
  ASSERT_OK(two);
  for (ModuleRole r : {ModuleRole::kMlpLinear1, ModuleRole::kSwiglu,
                       ModuleRole::kMlpLinear2}) {
    EXPECT_EQ(Find(*two, r)->flops_fwd, 2 * Find(*one, r)->flops_fwd);
  }
  EXPECT_EQ(Find(*two, ModuleRole::kRouter)->flops_fwd, 0);
}

TEST(ModelFlopsTest, Examples) {
  EXPECT_EQ(ModelFlopsTotal(0, 0, 10, 1, 4, 2), 80);
  EXPECT_EQ(ModelFlopsTotal(3, 5, 10, 0, 1, 1), 8);
  EXPECT_EQ(ModelFlopsTotal(3, 5, 10, 4, 1, 1), 48);
}

TEST(ModelFlopsTest, WholeModelIgnoresSharding) {
  auto a = ModelFlopsTotal(TinyDense(), Plan(1, 1, 1, 1, 1, 1, 1, 1));
  auto b = ModelFlopsTotal(TinyDense(), Plan(2, 2, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(a);
  ASSERT_OK(b);
  EXPECT_EQ(*a, *b);
}

TEST(ArchPropertyTest, LinearInMicroBatch) {
  ModelArchitecture m = TinyDense();
  m.hidden = 64;
  m.heads = 8;
  m.seq_len = 32;
  m.dense_ffn = 128;
  for (int64_t b : {1, 2, 3, 5}) {
    auto x = Decompose(m, Plan(2, 2, 1, 1, 1, b, 1, 1));
    auto y = Decompose(m, Plan(2, 2, 1, 1, 1, 2 * b, 1, 1));
    ASSERT_OK(x);
    ASSERT_OK(y);
    for (size_t i = 0; i < x->layer.size(); ++i) {
      EXPECT_EQ(y->layer[i].flops_fwd, 2 * x->layer[i].flops_fwd);
      EXPECT_EQ(y->layer[i].act_bytes, 2 * x->layer[i].act_bytes);
    }
  }
}

TEST(ArchPropertyTest, GqaWithAllGroupsIsMha) {
  ModelArchitecture mha = TinyDense();
  ModelArchitecture gqa = mha;
  gqa.attention = AttentionKind::kGqa;
  gqa.query_groups = gqa.heads;
  auto a = Decompose(mha, Plan(1, 1, 1, 1, 1, 2, 2, 1));
  auto b = Decompose(gqa, Plan(1, 1, 1, 1, 1, 2, 2, 1));
  ASSERT_OK(a);
  ASSERT_OK(b);
  for (size_t i = 0; i < a->layer.size(); ++i) {
    EXPECT_EQ(a->layer[i].flops_fwd, b->layer[i].flops_fwd);
    EXPECT_EQ(a->layer[i].param_count, b->layer[i].param_count);
  }
}

TEST(ArchPropertyTest, GqaShrinksKeyValueProjections) {
  ModelArchitecture gqa = TinyDense();
  gqa.heads = 4;
  gqa.attention = AttentionKind::kGqa;
  gqa.query_groups = 1;
  auto dec = Decompose(gqa, Plan(1, 1, 1, 1, 1, 1, 1, 1));
  ASSERT_OK(dec);
  // (2 + 4 q/a) b s h^2 = 3 * 2 * 16.
  EXPECT_EQ(Find(*dec, ModuleRole::kQkv)->flops_fwd, 3 * 2 * 16);
}

TEST(ArchPropertyTest, ShardedParamsSumToUnsharded) {
  for (const ModelArchitecture& m : {TinyDense(), TinyMoe(2)}) {
    auto full = Decompose(m, Plan(1, 1, 1, 1, 1, 1, 1, 1));
    ASSERT_OK(full);
    for (int t : {1, 2}) {
      for (int e : {1, 2, 4}) {
        if (m.structure == StructureKind::kDense && e > 1) continue;
        auto part = Decompose(m, Plan(t, 1, 1, e, 1, 1, 1, 1));
        ASSERT_OK(part);
        double dense = 0, expert = 0;
        for (const ModuleShape& s : part->layer) {
          (s.expert ? expert : dense) += s.param_count;
        }
        EXPECT_DOUBLE_EQ(dense * t + expert * t * e, SumParams(full->layer));
      }
    }
  }
}

TEST(ArchPropertyTest, Deterministic) {
  auto a = Decompose(TinyMoe(2), Plan(2, 1, 1, 2, 1, 3, 3, 1));
  auto b = Decompose(TinyMoe(2), Plan(2, 1, 1, 2, 1, 3, 3, 1));
  ASSERT_OK(a);
  ASSERT_OK(b);
  for (size_t i = 0; i < a->layer.size(); ++i) {
    EXPECT_EQ(a->layer[i].flops_fwd, b->layer[i].flops_fwd);
    EXPECT_EQ(a->layer[i].act_bytes, b->layer[i].act_bytes);
  }
}

TEST(ArchValidationTest, Invariants) {
  EXPECT_OK(ValidateArchitecture(TinyDense()));
  ModelArchitecture m = TinyDense();
  m.attention = AttentionKind::kGqa;
  m.query_groups = 3;
  EXPECT_FALSE(ValidateArchitecture(m).ok());
  m = TinyMoe(5);
  EXPECT_FALSE(ValidateArchitecture(m).ok());
  m = TinyMoe(1);
  m.expert_ffn.reset();
  EXPECT_FALSE(ValidateArchitecture(m).ok());
}

TEST(ArchValidationTest, MlaPluginUsesOverride) {
  ModelArchitecture m = TinyDense();
  m.attention = AttentionKind::kMlaPlugin;
  m.attention_override = {
      {"mla-down", ModuleRole::kQkv, 10, 1, 5},
      {"mla-core", ModuleRole::kAttentionMap, 20, 2, 0},
  };
  auto dec = Decompose(m, Plan(1, 1, 1, 1, 1, 1, 1, 1), 2.0);
  ASSERT_OK(dec);
  ASSERT_EQ(dec->layer[1].name, "mla-down");
  EXPECT_EQ(dec->layer[1].flops_fwd, 10 * 2);
  EXPECT_EQ(dec->layer[2].act_bytes, 2 * 2 * 2);
}

TEST(ArchNamesTest, RoundTrip) {
  for (AttentionKind k : {AttentionKind::kMha, AttentionKind::kGqa,
                          AttentionKind::kMlaPlugin}) {
    auto parsed = ParseAttentionKind(AttentionKindName(k));
    ASSERT_OK(parsed);
    EXPECT_EQ(*parsed, k);
  }
  EXPECT_FALSE(ParseModuleRole("nope").ok());
}

}  // namespace
}  // namespace ptperf
