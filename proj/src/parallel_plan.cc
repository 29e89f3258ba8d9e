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

#include "ptperf/parallel_plan.h"

#include <tuple>

#include "absl/strings/str_cat.h"

namespace ptperf {

std::string ParallelPlan::ToString() const {
  return absl::StrCat("t=", t, " c=", c, " p=", p, " e=", e, " d=", d,
                      " m_bs=", micro_batch_size, " g_bs=", global_batch_size,
                      " v=", v);
}

absl::Status ValidatePlan(const ParallelPlan& plan, int64_t num_layers) {
  if (plan.t < 1 || plan.c < 1 || plan.p < 1 || plan.e < 1 || plan.d < 1 ||
      plan.v < 1 || plan.micro_batch_size < 1 || plan.global_batch_size < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("parallel sizes must all be >= 1: ", plan.ToString()));
  }
  if (num_layers % (int64_t{plan.p} * plan.v) != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("L=", num_layers, " is not divisible by p*v=",
                     int64_t{plan.p} * plan.v));
  }
  if (plan.v > 1 && plan.p == 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("v=", plan.v, " needs p > 1 to interleave"));
  }
  if (plan.global_batch_size % (plan.micro_batch_size * plan.d) != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "g_bs=", plan.global_batch_size, " is not divisible by m_bs*d=",
        plan.micro_batch_size * plan.d));
  }
  return absl::OkStatus();
}

bool PlanLess(const ParallelPlan& a, const ParallelPlan& b) {
  return std::tie(a.t, a.c, a.p, a.e, a.d, a.micro_batch_size, a.v) <
         std::tie(b.t, b.c, b.p, b.e, b.d, b.micro_batch_size, b.v);
}

}  // namespace ptperf
