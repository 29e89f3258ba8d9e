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

#include "ptperf/config.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "ptperf/status_macros.h"

namespace ptperf {
namespace {

using nlohmann::json;

constexpr double kGiga = 1e9;
constexpr double kTera = 1e12;

// Typed access to one JSON object with errors that carry the field path.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  absl::Status IsObject() const {
    if (!j_.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("field '", path_, "': expected an object"));
    }
    return absl::OkStatus();
  }

  absl::Status Known(std::initializer_list<std::string_view> keys) const {
    std::set<std::string_view> known(keys);
    for (const auto& [key, value] : j_.items()) {
      if (!known.count(key)) {
        return absl::InvalidArgumentError(
            absl::StrCat("field '", Path(key), "': unknown field"));
      }
    }
    return absl::OkStatus();
  }

  bool Has(std::string_view key) const {
    return j_.contains(std::string(key));
  }
  const json& Raw(std::string_view key) const { return j_.at(std::string(key)); }
  std::string Path(std::string_view key) const {
    return path_.empty() ? std::string(key)
                         : absl::StrCat(path_, ".", std::string(key));
  }

  template <typename T>
  absl::StatusOr<T> Required(std::string_view key) const {
    if (!Has(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("field '", Path(key), "': required"));
    }
    return Convert<T>(key);
  }

  template <typename T>
  absl::StatusOr<std::optional<T>> Optional(std::string_view key) const {
    if (!Has(key) || Raw(key).is_null()) return std::optional<T>();
    ASSIGN_OR_RETURN(T value, Convert<T>(key));
    return std::optional<T>(std::move(value));
  }

  template <typename T>
  absl::StatusOr<T> Or(std::string_view key, T fallback) const {
    ASSIGN_OR_RETURN(std::optional<T> value, Optional<T>(key));
    return value ? *value : fallback;
  }

 private:
  template <typename T>
  absl::StatusOr<T> Convert(std::string_view key) const {
    const json& v = Raw(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return TypeError(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return TypeError(key, "an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return TypeError(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return TypeError(key, "a string");
    }
    return v.get<T>();
  }

  absl::Status TypeError(std::string_view key, std::string_view what) const {
    return absl::InvalidArgumentError(absl::StrCat(
        "field '", Path(key), "': expected ", std::string(what)));
  }

  const json& j_;
  std::string path_;
};

absl::Status Annotate(const absl::Status& s, std::string_view where) {
  if (s.ok()) return s;
  return absl::Status(s.code(),
                      absl::StrCat(std::string(where), ": ", s.message()));
}

absl::StatusOr<json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot read '", path, "'"));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("parse error in '", path, "': ", e.what()));
  }
}

// An inline object, or a path (relative to `base_dir`) to a JSON file.
absl::StatusOr<json> Resolve(const json& value, const std::string& base_dir) {
  if (!value.is_string()) return value;
  std::filesystem::path p(value.get<std::string>());
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  return ReadJsonFile(p.string());
}

template <typename T>
absl::StatusOr<std::vector<T>> ListOf(const Fields& f, std::string_view key) {
  const json& v = f.Raw(key);
  if (!v.is_array()) {
    return absl::InvalidArgumentError(
        absl::StrCat("field '", f.Path(key), "': expected a list"));
  }
  std::vector<T> out;
  for (const json& x : v) {
    if (!x.is_number_integer()) {
      return absl::InvalidArgumentError(
          absl::StrCat("field '", f.Path(key), "': expected integers"));
    }
    out.push_back(x.get<T>());
  }
  return out;
}

absl::StatusOr<OverlapCoefficients> ParseCoefficients(const json& j,
                                                      const std::string& path) {
  OverlapCoefficients k;
  if (j.is_boolean()) return k;
  Fields f(j, path);
  RETURN_IF_ERROR(f.IsObject());
  RETURN_IF_ERROR(f.Known({"alpha", "beta", "split_count"}));
  ASSIGN_OR_RETURN(k.alpha, f.Or<double>("alpha", 1.0));
  ASSIGN_OR_RETURN(k.beta, f.Or<double>("beta", 1.0));
  return k;
}

// A feature is on when present and not `false`.
bool Enabled(const Fields& f, std::string_view key) {
  if (!f.Has(key)) return false;
  const json& v = f.Raw(key);
  return !(v.is_null() || (v.is_boolean() && !v.get<bool>()));
}

}  // namespace

std::string_view OutputFormatName(OutputFormat f) {
  switch (f) {
    case OutputFormat::kJson:
      return "json";
    case OutputFormat::kCsv:
      return "csv";
    case OutputFormat::kMarkdown:
      return "markdown";
  }
  return "?";
}

absl::StatusOr<OutputFormat> ParseOutputFormat(std::string_view name) {
  for (OutputFormat f :
       {OutputFormat::kJson, OutputFormat::kCsv, OutputFormat::kMarkdown}) {
    if (OutputFormatName(f) == name) return f;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown output format '", std::string(name), "' (json, csv, markdown)"));
}

absl::StatusOr<ModelArchitecture> ParseModel(const json& j) {
  Fields f(j, "model");
  RETURN_IF_ERROR(f.IsObject());
  RETURN_IF_ERROR(f.Known({"name", "L", "s", "h", "a", "q", "g_d", "g_e",
                           "t_k", "n_experts", "V", "r", "attention",
                           "structure", "attention_override",
                           "moe_linear1_uses_expert_ffn"}));
  ModelArchitecture m;
  ASSIGN_OR_RETURN(m.name, f.Or<std::string>("name", ""));
  ASSIGN_OR_RETURN(m.num_layers, f.Required<int64_t>("L"));
  ASSIGN_OR_RETURN(m.seq_len, f.Required<int64_t>("s"));
  ASSIGN_OR_RETURN(m.hidden, f.Required<int64_t>("h"));
  ASSIGN_OR_RETURN(m.heads, f.Required<int64_t>("a"));
  ASSIGN_OR_RETURN(m.query_groups, f.Optional<int64_t>("q"));
  ASSIGN_OR_RETURN(m.dense_ffn, f.Required<int64_t>("g_d"));
  ASSIGN_OR_RETURN(m.expert_ffn, f.Optional<int64_t>("g_e"));
  ASSIGN_OR_RETURN(m.top_k, f.Optional<int64_t>("t_k"));
  ASSIGN_OR_RETURN(m.num_experts, f.Optional<int64_t>("n_experts"));
  ASSIGN_OR_RETURN(m.mla_rank, f.Optional<int64_t>("r"));
  ASSIGN_OR_RETURN(m.vocab, f.Required<int64_t>("V"));
  ASSIGN_OR_RETURN(std::string attention, f.Or<std::string>("attention", "MHA"));
  ASSIGN_OR_RETURN(m.attention, ParseAttentionKind(attention));
  ASSIGN_OR_RETURN(std::string structure,
                   f.Or<std::string>("structure", "dense"));
  if (structure == "dense") {
    m.structure = StructureKind::kDense;
  } else if (structure == "moe") {
    m.structure = StructureKind::kMoe;
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "field 'model.structure': expected 'dense' or 'moe', got '",
        structure, "'"));
  }
  ASSIGN_OR_RETURN(m.moe_linear1_uses_expert_ffn,
                   f.Or<bool>("moe_linear1_uses_expert_ffn", false));
  if (f.Has("attention_override")) {
    const json& rows = f.Raw("attention_override");
    if (!rows.is_array()) {
      return absl::InvalidArgumentError(
          "field 'model.attention_override': expected a list");
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      Fields r(rows[i], absl::StrCat("model.attention_override[", i, "]"));
      RETURN_IF_ERROR(r.IsObject());
      RETURN_IF_ERROR(r.Known(
          {"name", "role", "flops_per_token", "act_elements_per_token",
           "params"}));
      ModuleOverride o;
      ASSIGN_OR_RETURN(o.name, r.Required<std::string>("name"));
      ASSIGN_OR_RETURN(std::string role, r.Required<std::string>("role"));
      ASSIGN_OR_RETURN(o.role, ParseModuleRole(role));
      ASSIGN_OR_RETURN(o.flops_per_token, r.Or<double>("flops_per_token", 0));
      ASSIGN_OR_RETURN(o.act_elements_per_token,
                       r.Or<double>("act_elements_per_token", 0));
      ASSIGN_OR_RETURN(o.params, r.Or<double>("params", 0));
      m.attention_override.push_back(std::move(o));
    }
  }
  RETURN_IF_ERROR(ValidateArchitecture(m));
  return m;
}

absl::StatusOr<HardwareSpec> ParseHardware(const json& j) {
  Fields f(j, "hardware");
  RETURN_IF_ERROR(f.IsObject());
  RETURN_IF_ERROR(f.Known({"B_H2D", "B_D2H", "B_DL", "B_DW", "M_CPU", "F_CPU",
                           "P_GPU", "M_GPU", "N", "B_HBM", "P_opt"}));
  HardwareSpec hw;
  ASSIGN_OR_RETURN(double h2d, f.Or<double>("B_H2D", 0));
  ASSIGN_OR_RETURN(double d2h, f.Or<double>("B_D2H", 0));
  ASSIGN_OR_RETURN(double dl, f.Or<double>("B_DL", 0));
  ASSIGN_OR_RETURN(double dw, f.Or<double>("B_DW", 0));
  ASSIGN_OR_RETURN(double m_cpu, f.Or<double>("M_CPU", 0));
  ASSIGN_OR_RETURN(double f_cpu, f.Or<double>("F_CPU", 0));
  ASSIGN_OR_RETURN(double p_gpu, f.Or<double>("P_GPU", 0));
  ASSIGN_OR_RETURN(double m_gpu, f.Required<double>("M_GPU"));
  ASSIGN_OR_RETURN(hw.gpus_per_node, f.Required<int>("N"));
  ASSIGN_OR_RETURN(double hbm, f.Or<double>("B_HBM", 0));
  ASSIGN_OR_RETURN(double p_opt, f.Required<double>("P_opt"));
  hw.h2d_bandwidth = h2d * kGiga;
  hw.d2h_bandwidth = d2h * kGiga;
  hw.disk_load_bandwidth = dl * kGiga;
  hw.disk_write_bandwidth = dw * kGiga;
  hw.cpu_memory = m_cpu * kGiga;
  hw.cpu_ops_per_second = f_cpu * kGiga;
  hw.gpu_peak_flops = p_gpu * kTera;
  hw.gpu_memory = m_gpu * kGiga;
  hw.hbm_bandwidth = hbm * kGiga;
  hw.optimizer_throughput = p_opt * kGiga;
  RETURN_IF_ERROR(ValidateHardware(hw));
  return hw;
}

absl::StatusOr<ProfileDb> ParseProfile(const json& j) {
  Fields f(j, "profile");
  RETURN_IF_ERROR(f.IsObject());
  RETURN_IF_ERROR(f.Known({"compute", "comm"}));
  ProfileDb db;
  if (f.Has("compute")) {
    const json& rows = f.Raw("compute");
    if (!rows.is_array()) {
      return absl::InvalidArgumentError(
          "field 'profile.compute': expected a list");
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      const std::string where = absl::StrCat("profile.compute[", i, "]");
      Fields r(rows[i], where);
      RETURN_IF_ERROR(r.IsObject());
      RETURN_IF_ERROR(r.Known({"module", "shape", "throughput",
                               "backward_throughput",
                               "backward_flops_ratio"}));
      ASSIGN_OR_RETURN(std::string module, r.Required<std::string>("module"));
      ASSIGN_OR_RETURN(std::string shape, r.Or<std::string>("shape", "*"));
      ASSIGN_OR_RETURN(double fwd, r.Required<double>("throughput"));
      ASSIGN_OR_RETURN(std::optional<double> bwd,
                       r.Optional<double>("backward_throughput"));
      ASSIGN_OR_RETURN(double ratio, r.Or<double>("backward_flops_ratio", 2.0));
      std::optional<double> bwd_si;
      if (bwd) bwd_si = *bwd * kTera;
      RETURN_IF_ERROR(Annotate(
          db.compute.Add(module, shape, fwd * kTera, bwd_si, ratio), where));
    }
  }
  if (f.Has("comm")) {
    const json& rows = f.Raw("comm");
    if (!rows.is_array()) {
      return absl::InvalidArgumentError("field 'profile.comm': expected a list");
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      const std::string where = absl::StrCat("profile.comm[", i, "]");
      Fields r(rows[i], where);
      RETURN_IF_ERROR(r.IsObject());
      RETURN_IF_ERROR(
          r.Known({"collective", "group", "size", "bandwidth", "beta"}));
      ASSIGN_OR_RETURN(std::string kind_name,
                       r.Required<std::string>("collective"));
      ASSIGN_OR_RETURN(CollectiveKind kind, ParseCollectiveKind(kind_name));
      ASSIGN_OR_RETURN(int group, r.Or<int>("group", 0));
      ASSIGN_OR_RETURN(double size, r.Or<double>("size", 1.0));
      ASSIGN_OR_RETURN(double bw, r.Required<double>("bandwidth"));
      ASSIGN_OR_RETURN(double beta, r.Or<double>("beta", 1.0));
      RETURN_IF_ERROR(
          Annotate(db.comm.Add(kind, group, size, bw * kGiga, beta), where));
    }
  }
  return db;
}

absl::StatusOr<ParallelPlan> ParsePlan(const json& j) {
  Fields f(j, "plan");
  RETURN_IF_ERROR(f.IsObject());
  RETURN_IF_ERROR(f.Known({"t", "c", "p", "e", "d", "m_bs", "g_bs", "v"}));
  ParallelPlan plan;
  ASSIGN_OR_RETURN(plan.t, f.Or<int>("t", 1));
  ASSIGN_OR_RETURN(plan.c, f.Or<int>("c", 1));
  ASSIGN_OR_RETURN(plan.p, f.Or<int>("p", 1));
  ASSIGN_OR_RETURN(plan.e, f.Or<int>("e", 1));
  ASSIGN_OR_RETURN(plan.d, f.Or<int>("d", 1));
  ASSIGN_OR_RETURN(plan.micro_batch_size, f.Or<int64_t>("m_bs", 1));
  ASSIGN_OR_RETURN(plan.global_batch_size, f.Required<int64_t>("g_bs"));
  ASSIGN_OR_RETURN(plan.v, f.Or<int>("v", 1));
  return plan;
}

absl::StatusOr<OptimizationSet> ParseOptimization(const json& j) {
  Fields f(j, "optimization");
  RETURN_IF_ERROR(f.IsObject());
  RETURN_IF_ERROR(f.Known({"name", "compute_scaling", "comm_scaling",
                           "tp_overlap", "cp_overlap", "ep_overlap",
                           "pp_overlap", "dp_overlap", "optimizer",
                           "activation", "offload"}));
  OptimizationSet o;
  ASSIGN_OR_RETURN(o.name, f.Or<std::string>("name", ""));
  for (std::string_view key : {"compute_scaling", "comm_scaling"}) {
    if (!f.Has(key)) continue;
    const json& m = f.Raw(key);
    if (!m.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("field '", f.Path(key), "': expected an object"));
    }
    auto& target = key == "compute_scaling" ? o.compute_scaling : o.comm_scaling;
    for (const auto& [name, value] : m.items()) {
      if (!value.is_number()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "field '", f.Path(key), ".", name, "': expected a number"));
      }
      if (key == "comm_scaling") {
        RETURN_IF_ERROR(Annotate(ParseCommPurpose(name).status(),
                                 f.Path(key)));
      }
      target[name] = value.get<double>();
    }
  }
  if (Enabled(f, "tp_overlap")) {
    TpOverlapConfig tp;
    ASSIGN_OR_RETURN(tp.coefficients,
                     ParseCoefficients(f.Raw("tp_overlap"), f.Path("tp_overlap")));
    if (f.Raw("tp_overlap").is_object()) {
      Fields t(f.Raw("tp_overlap"), f.Path("tp_overlap"));
      ASSIGN_OR_RETURN(tp.split_count, t.Or<int>("split_count", 4));
    }
    o.tp_overlap = tp;
  }
  if (Enabled(f, "cp_overlap")) {
    ASSIGN_OR_RETURN(o.cp_overlap, ParseCoefficients(f.Raw("cp_overlap"),
                                                     f.Path("cp_overlap")));
  }
  if (Enabled(f, "ep_overlap")) {
    ASSIGN_OR_RETURN(o.ep_overlap, ParseCoefficients(f.Raw("ep_overlap"),
                                                     f.Path("ep_overlap")));
  }
  if (Enabled(f, "pp_overlap")) {
    ASSIGN_OR_RETURN(o.pp_overlap, ParseCoefficients(f.Raw("pp_overlap"),
                                                     f.Path("pp_overlap")));
  }
  if (Enabled(f, "dp_overlap")) {
    DpOverlapConfig dp;
    if (f.Raw("dp_overlap").is_object()) {
      Fields d(f.Raw("dp_overlap"), f.Path("dp_overlap"));
      RETURN_IF_ERROR(d.Known(
          {"alpha_rs", "beta_bwd", "alpha_ag", "beta_fwd", "mode"}));
      ASSIGN_OR_RETURN(dp.alpha_rs, d.Or<double>("alpha_rs", 1.0));
      ASSIGN_OR_RETURN(dp.beta_bwd, d.Or<double>("beta_bwd", 1.0));
      ASSIGN_OR_RETURN(dp.alpha_ag, d.Or<double>("alpha_ag", 1.0));
      ASSIGN_OR_RETURN(dp.beta_fwd, d.Or<double>("beta_fwd", 1.0));
      ASSIGN_OR_RETURN(std::string mode, d.Or<std::string>("mode", "exposed-only"));
      if (mode == "exposed-only") {
        dp.mode = DpOverlapMode::kExposedOnly;
      } else if (mode == "verbatim") {
        dp.mode = DpOverlapMode::kVerbatim;
      } else {
        return absl::InvalidArgumentError(absl::StrCat(
            "field '", d.Path("mode"),
            "': expected 'exposed-only' or 'verbatim', got '", mode, "'"));
      }
    }
    o.dp_overlap = dp;
  }
  ASSIGN_OR_RETURN(std::string opt, f.Or<std::string>("optimizer", "none"));
  ASSIGN_OR_RETURN(o.optimizer, ParseOptimizerStrategy(opt));
  ASSIGN_OR_RETURN(std::string act, f.Or<std::string>("activation", "none"));
  ASSIGN_OR_RETURN(o.activation, ParseActivationStrategy(act));
  if (f.Has("offload")) {
    Fields k(f.Raw("offload"), f.Path("offload"));
    RETURN_IF_ERROR(k.IsObject());
    RETURN_IF_ERROR(k.Known(
        {"alpha_offload", "beta_offload", "alpha_fetch", "beta_fetch"}));
    ASSIGN_OR_RETURN(o.offload.alpha_offload, k.Or<double>("alpha_offload", 1));
    ASSIGN_OR_RETURN(o.offload.beta_offload, k.Or<double>("beta_offload", 1));
    ASSIGN_OR_RETURN(o.offload.alpha_fetch, k.Or<double>("alpha_fetch", 1));
    ASSIGN_OR_RETURN(o.offload.beta_fetch, k.Or<double>("beta_fetch", 1));
  }
  RETURN_IF_ERROR(ValidateOptimizationSet(o));
  return o;
}

absl::StatusOr<FaultConfig> ParseFault(const json& j) {
  Fields f(j, "fault");
  RETURN_IF_ERROR(f.IsObject());
  RETURN_IF_ERROR(f.Known({"r_f_per_node_day", "u_bc", "u_bp", "u_bj", "mix",
                           "u_b", "u0", "nodes", "T_save", "I_ckpt", "S",
                           "tokens", "T_step"}));
  FaultConfig fc;
  FaultModel& m = fc.model;
  ASSIGN_OR_RETURN(m.failures_per_node_day,
                   f.Required<double>("r_f_per_node_day"));
  ASSIGN_OR_RETURN(m.u_process, f.Or<double>("u_bc", m.u_process));
  ASSIGN_OR_RETURN(m.u_pod, f.Or<double>("u_bp", m.u_pod));
  ASSIGN_OR_RETURN(m.u_job, f.Or<double>("u_bj", m.u_job));
  ASSIGN_OR_RETURN(m.mean_repair, f.Optional<double>("u_b"));
  ASSIGN_OR_RETURN(m.u0, f.Or<double>("u0", 0.0));
  if (f.Has("mix")) {
    const json& mix = f.Raw("mix");
    if (!mix.is_array() || mix.size() != 3 || !mix[0].is_number() ||
        !mix[1].is_number() || !mix[2].is_number()) {
      return absl::InvalidArgumentError(
          "field 'fault.mix': expected three numbers [process, pod, job]");
    }
    m.mix = {mix[0].get<double>(), mix[1].get<double>(), mix[2].get<double>()};
  }
  ASSIGN_OR_RETURN(std::optional<int64_t> nodes, f.Optional<int64_t>("nodes"));
  fc.has_nodes = nodes.has_value();
  if (nodes) m.num_nodes = *nodes;
  RETURN_IF_ERROR(ValidateFaultModel(m));

  CheckpointPolicy& pol = fc.policy;
  ASSIGN_OR_RETURN(pol.t_save, f.Or<double>("T_save", 0.0));
  ASSIGN_OR_RETURN(std::optional<int64_t> interval,
                   f.Optional<int64_t>("I_ckpt"));
  fc.has_interval = interval.has_value();
  if (interval) pol.interval = *interval;
  ASSIGN_OR_RETURN(std::optional<double> t_step, f.Optional<double>("T_step"));
  fc.has_t_step = t_step.has_value();
  if (t_step) pol.t_step = *t_step;
  ASSIGN_OR_RETURN(std::optional<int64_t> steps, f.Optional<int64_t>("S"));
  ASSIGN_OR_RETURN(fc.tokens, f.Optional<double>("tokens"));
  if (steps && fc.tokens) {
    return absl::InvalidArgumentError(
        "field 'fault': give either S or tokens, not both");
  }
  if (!steps && !fc.tokens) {
    return absl::InvalidArgumentError("field 'fault.S': required (or tokens)");
  }
  if (steps) pol.steps = *steps;
  if (pol.t_save < 0) {
    return absl::InvalidArgumentError("field 'fault.T_save': must be >= 0");
  }
  if (pol.interval < 1) {
    return absl::InvalidArgumentError("field 'fault.I_ckpt': must be >= 1");
  }
  return fc;
}

absl::StatusOr<RunConfig> ParseConfig(const json& doc,
                                      const std::string& base_dir) {
  Fields f(doc, "");
  RETURN_IF_ERROR(f.IsObject());
  RETURN_IF_ERROR(f.Known({"schema_version", "model", "hardware", "profile",
                           "dtypes", "tflops_convention", "plan", "space",
                           "optimization", "fault", "output"}));
  RunConfig rc;
  ASSIGN_OR_RETURN(rc.schema_version, f.Or<int>("schema_version", kSchemaVersion));
  if (rc.schema_version != kSchemaVersion) {
    return absl::InvalidArgumentError(
        absl::StrCat("field 'schema_version': unsupported version ",
                     rc.schema_version, " (expected ", kSchemaVersion, ")"));
  }
  ModelContext& ctx = rc.context;
  for (std::string_view key : {"model", "hardware", "profile"}) {
    if (!f.Has(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("field '", std::string(key), "': required"));
    }
  }
  ASSIGN_OR_RETURN(json model, Resolve(f.Raw("model"), base_dir));
  ASSIGN_OR_RETURN(ctx.arch, ParseModel(model));
  ASSIGN_OR_RETURN(json hardware, Resolve(f.Raw("hardware"), base_dir));
  ASSIGN_OR_RETURN(ctx.hw, ParseHardware(hardware));
  ASSIGN_OR_RETURN(json profile, Resolve(f.Raw("profile"), base_dir));
  ASSIGN_OR_RETURN(ctx.profile, ParseProfile(profile));

  if (f.Has("dtypes")) {
    Fields d(f.Raw("dtypes"), "dtypes");
    RETURN_IF_ERROR(d.IsObject());
    RETURN_IF_ERROR(d.Known({"param", "grad", "optimizer", "activation"}));
    ASSIGN_OR_RETURN(ctx.dtypes.param, d.Or<double>("param", 2));
    ASSIGN_OR_RETURN(ctx.dtypes.grad, d.Or<double>("grad", 2));
    ASSIGN_OR_RETURN(ctx.dtypes.optimizer, d.Or<double>("optimizer", 4));
    ASSIGN_OR_RETURN(ctx.dtypes.activation, d.Or<double>("activation", 2));
  }
  ASSIGN_OR_RETURN(std::string conv,
                   f.Or<std::string>("tflops_convention", "fwd-bwd"));
  if (conv == "fwd-bwd") {
    ctx.convention = TflopsConvention::kForwardBackward;
  } else if (conv == "raw") {
    ctx.convention = TflopsConvention::kRaw;
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "field 'tflops_convention': expected 'fwd-bwd' or 'raw', got '", conv,
        "'"));
  }

  if (f.Has("plan")) {
    ASSIGN_OR_RETURN(rc.plan, ParsePlan(f.Raw("plan")));
    RETURN_IF_ERROR(Annotate(ValidatePlan(*rc.plan, ctx.arch.num_layers), "plan"));
  }
  if (f.Has("optimization")) {
    ASSIGN_OR_RETURN(rc.optimization, ParseOptimization(f.Raw("optimization")));
  }
  if (f.Has("space")) {
    Fields s(f.Raw("space"), "space");
    RETURN_IF_ERROR(s.IsObject());
    RETURN_IF_ERROR(s.Known({"g_n", "g_bs", "t", "c", "p", "e", "d", "m_bs",
                             "v", "optimizations"}));
    ASSIGN_OR_RETURN(int64_t g_n, s.Required<int64_t>("g_n"));
    ASSIGN_OR_RETURN(int64_t g_bs, s.Required<int64_t>("g_bs"));
    SearchSpace space = DefaultSearchSpace(ctx.arch, ctx.hw, g_n, g_bs);
    if (s.Has("t")) {
      ASSIGN_OR_RETURN(space.t, ListOf<int>(s, "t"));
    }
    if (s.Has("c")) {
      ASSIGN_OR_RETURN(space.c, ListOf<int>(s, "c"));
    }
    if (s.Has("p")) {
      ASSIGN_OR_RETURN(space.p, ListOf<int>(s, "p"));
    }
    if (s.Has("e")) {
      ASSIGN_OR_RETURN(space.e, ListOf<int>(s, "e"));
    }
    if (s.Has("d")) {
      ASSIGN_OR_RETURN(space.d, ListOf<int>(s, "d"));
    }
    if (s.Has("m_bs")) {
      ASSIGN_OR_RETURN(space.micro_batch_size, ListOf<int64_t>(s, "m_bs"));
    }
    if (s.Has("v")) {
      ASSIGN_OR_RETURN(space.v, ListOf<int>(s, "v"));
    }
    if (!s.Has("optimizations") ||
        (s.Raw("optimizations").is_string() &&
         s.Raw("optimizations").get<std::string>() == "default")) {
      space.optimizations = DefaultAllowlist();
    } else {
      const json& list = s.Raw("optimizations");
      if (!list.is_array()) {
        return absl::InvalidArgumentError(
            "field 'space.optimizations': expected a list or \"default\"");
      }
      for (size_t i = 0; i < list.size(); ++i) {
        absl::StatusOr<OptimizationSet> o = ParseOptimization(list[i]);
        if (!o.ok()) {
          return Annotate(o.status(),
                          absl::StrCat("space.optimizations[", i, "]"));
        }
        space.optimizations.push_back(*std::move(o));
      }
    }
    RETURN_IF_ERROR(ValidateSearchSpace(space));
    rc.space = std::move(space);
  }
  if (f.Has("fault")) {
    ASSIGN_OR_RETURN(rc.fault, ParseFault(f.Raw("fault")));
    if (rc.fault->tokens) {
      const int64_t g_bs = rc.plan ? rc.plan->global_batch_size
                         : rc.space ? rc.space->global_batch_size
                                    : 0;
      if (g_bs == 0) {
        return absl::InvalidArgumentError(
            "field 'fault.tokens': needs a plan or space to fix g_bs");
      }
      ASSIGN_OR_RETURN(rc.fault->policy.steps,
                       StepsFromTokens(*rc.fault->tokens, g_bs,
                                       ctx.arch.seq_len));
    }
    if (!rc.fault->has_nodes && rc.plan) {
      rc.fault->model.num_nodes = rc.plan->NumNodes(ctx.hw.gpus_per_node);
    }
  }
  ASSIGN_OR_RETURN(std::string out, f.Or<std::string>("output", "json"));
  ASSIGN_OR_RETURN(rc.format, ParseOutputFormat(out));
  return rc;
}

absl::StatusOr<RunConfig> LoadConfig(const std::string& path) {
  ASSIGN_OR_RETURN(json doc, ReadJsonFile(path));
  return ParseConfig(doc,
                     std::filesystem::path(path).parent_path().string());
}

namespace {

json CoefficientsToJson(const OverlapCoefficients& k) {
  return {{"alpha", k.alpha}, {"beta", k.beta}};
}

json OptimizationToJson(const OptimizationSet& o) {
  json j = {{"name", o.name},
            {"compute_scaling", o.compute_scaling},
            {"comm_scaling", o.comm_scaling},
            {"optimizer", std::string(OptimizerStrategyName(o.optimizer))},
            {"activation", std::string(ActivationStrategyName(o.activation))},
            {"offload",
             {{"alpha_offload", o.offload.alpha_offload},
              {"beta_offload", o.offload.beta_offload},
              {"alpha_fetch", o.offload.alpha_fetch},
              {"beta_fetch", o.offload.beta_fetch}}}};
  j["tp_overlap"] = nullptr;
  if (o.tp_overlap) {
    j["tp_overlap"] = CoefficientsToJson(o.tp_overlap->coefficients);
    j["tp_overlap"]["split_count"] = o.tp_overlap->split_count;
  }
  j["cp_overlap"] = o.cp_overlap ? CoefficientsToJson(*o.cp_overlap) : json();
  j["ep_overlap"] = o.ep_overlap ? CoefficientsToJson(*o.ep_overlap) : json();
  j["pp_overlap"] = o.pp_overlap ? CoefficientsToJson(*o.pp_overlap) : json();
  j["dp_overlap"] = nullptr;
  if (o.dp_overlap) {
    j["dp_overlap"] = {{"alpha_rs", o.dp_overlap->alpha_rs},
                       {"beta_bwd", o.dp_overlap->beta_bwd},
                       {"alpha_ag", o.dp_overlap->alpha_ag},
                       {"beta_fwd", o.dp_overlap->beta_fwd},
                       {"mode", o.dp_overlap->mode == DpOverlapMode::kVerbatim
                                    ? "verbatim"
                                    : "exposed-only"}};
  }
  return j;
}

json PlanToJson(const ParallelPlan& p) {
  return {{"t", p.t}, {"c", p.c}, {"p", p.p}, {"e", p.e}, {"d", p.d},
          {"m_bs", p.micro_batch_size}, {"g_bs", p.global_batch_size},
          {"v", p.v}};
}

}  // namespace

json RunConfigToJson(const RunConfig& rc) {
  const ModelContext& ctx = rc.context;
  const ModelArchitecture& m = ctx.arch;
  const HardwareSpec& hw = ctx.hw;
  json j;
  j["schema_version"] = rc.schema_version;
  j["model"] = {{"name", m.name}, {"L", m.num_layers}, {"s", m.seq_len},
                {"h", m.hidden}, {"a", m.heads}, {"g_d", m.dense_ffn},
                {"V", m.vocab},
                {"attention", std::string(AttentionKindName(m.attention))},
                {"structure",
                 m.structure == StructureKind::kMoe ? "moe" : "dense"}};
  if (m.query_groups) j["model"]["q"] = *m.query_groups;
  if (m.expert_ffn) j["model"]["g_e"] = *m.expert_ffn;
  if (m.top_k) j["model"]["t_k"] = *m.top_k;
  if (m.num_experts) j["model"]["n_experts"] = *m.num_experts;
  if (m.mla_rank) j["model"]["r"] = *m.mla_rank;
  j["hardware_si"] = {{"B_H2D_bytes_per_s", hw.h2d_bandwidth},
                      {"B_D2H_bytes_per_s", hw.d2h_bandwidth},
                      {"B_DL_bytes_per_s", hw.disk_load_bandwidth},
                      {"B_DW_bytes_per_s", hw.disk_write_bandwidth},
                      {"M_CPU_bytes", hw.cpu_memory},
                      {"F_CPU_ops_per_s", hw.cpu_ops_per_second},
                      {"P_GPU_flops", hw.gpu_peak_flops},
                      {"M_GPU_bytes", hw.gpu_memory},
                      {"N", hw.gpus_per_node},
                      {"B_HBM_bytes_per_s", hw.hbm_bandwidth},
                      {"P_opt_params_per_s", hw.optimizer_throughput}};
  j["dtypes"] = {{"param", ctx.dtypes.param},
                 {"grad", ctx.dtypes.grad},
                 {"optimizer", ctx.dtypes.optimizer},
                 {"activation", ctx.dtypes.activation}};
  j["tflops_convention"] =
      ctx.convention == TflopsConvention::kRaw ? "raw" : "fwd-bwd";
  j["plan"] = rc.plan ? PlanToJson(*rc.plan) : json();
  j["optimization"] = OptimizationToJson(rc.optimization);
  if (rc.space) {
    const SearchSpace& s = rc.space.value();
    json opts = json::array();
    for (const auto& o : s.optimizations) opts.push_back(OptimizationToJson(o));
    j["space"] = {{"g_n", s.num_gpus}, {"g_bs", s.global_batch_size},
                  {"t", s.t}, {"c", s.c}, {"p", s.p}, {"e", s.e}, {"d", s.d},
                  {"m_bs", s.micro_batch_size}, {"v", s.v},
                  {"optimizations", opts}};
  } else {
    j["space"] = nullptr;
  }
  if (rc.fault) {
    const FaultModel& f = rc.fault->model;
    const CheckpointPolicy& p = rc.fault->policy;
    j["fault"] = {{"r_f_per_node_day", f.failures_per_node_day},
                  {"r_f_per_node_second",
                   f.failures_per_node_day / kSecondsPerDay},
                  {"u_bc", f.u_process}, {"u_bp", f.u_pod}, {"u_bj", f.u_job},
                  {"mix", {f.mix.process, f.mix.pod, f.mix.job}},
                  {"u0", f.u0}, {"nodes", f.num_nodes},
                  {"T_save", p.t_save}, {"S", p.steps}};
    j["fault"]["u_b"] = f.mean_repair ? json(*f.mean_repair) : json();
    j["fault"]["I_ckpt"] = rc.fault->has_interval ? json(p.interval) : json();
    j["fault"]["T_step"] = rc.fault->has_t_step ? json(p.t_step) : json();
  } else {
    j["fault"] = nullptr;
  }
  j["output"] = std::string(OutputFormatName(rc.format));
  return j;
}

}  // namespace ptperf
