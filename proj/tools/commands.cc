/*
 * Copyright 2026 The AFL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "commands.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "afl/errors.h"
#include "afl/eval.h"
#include "afl/model.h"
#include "afl/oracle.h"
#include "afl/projection.h"
#include "config.h"

namespace afl::cli {
namespace {

namespace fs = std::filesystem;

struct Mode {
  std::string stem;   // file name stem
  std::string label;  // table row label
  enum class Kind { kAfl, kOptimistic, kUniform, kDomain } kind;
  std::size_t domain = 0;
};

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out;
}

std::vector<Mode> expand_modes(const std::string& mode, const FederatedDataset& ds) {
  const auto domain_mode = [&](std::size_t k) {
    return Mode{"domain-" + sanitize(ds.domain(k).name), "L_" + ds.domain(k).name,
                Mode::Kind::kDomain, k};
  };
  const Mode afl{"afl", "L_D_Lambda", Mode::Kind::kAfl};
  const Mode optimistic{"optimistic", "L_D_Lambda_optimistic", Mode::Kind::kOptimistic};
  const Mode uniform{"uniform", "L_U", Mode::Kind::kUniform};
  if (mode == "afl") return {afl};
  if (mode == "optimistic") return {optimistic};
  if (mode == "uniform") return {uniform};
  if (mode == "all") {
    std::vector<Mode> modes;
    for (std::size_t k = 0; k < ds.num_domains(); ++k) modes.push_back(domain_mode(k));
    modes.push_back(uniform);
    modes.push_back(afl);
    return modes;
  }
  if (mode.rfind("domain-", 0) == 0) {
    const std::string key = mode.substr(7);
    for (std::size_t k = 0; k < ds.num_domains(); ++k) {
      if (key == std::to_string(k) || key == ds.domain(k).name) return {domain_mode(k)};
    }
    throw ConfigError("no domain '" + key + "'");
  }
  throw ConfigError("mode must be afl, optimistic, uniform, domain-K or all");
}

TrainResult run_mode(const Mode& m, const TrainConfig& tc, const FederatedDataset& ds) {
  switch (m.kind) {
    case Mode::Kind::kAfl: return stochastic_afl(tc, ds);
    case Mode::Kind::kOptimistic: return optimistic_afl(tc, ds);
    case Mode::Kind::kUniform: return uniform_baseline(tc, ds);
    case Mode::Kind::kDomain: return single_domain_baseline(tc, ds, m.domain);
  }
  throw ConfigError("unknown mode");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write '" + path + "'");
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<double> aggregate_weights(const std::string& mode,
                                      const FederatedDataset& train) {
  if (mode.empty() || mode == "test") return {};
  if (mode == "train") return train.empirical_proportions();
  throw ConfigError("aggregate must be test or train");
}

Json trajectory_json(const TrajectoryRecord& r) {
  return {{"record", "step"},
          {"t", r.t},
          {"mixture_loss", r.mixture_loss},
          {"agnostic_loss", r.agnostic_loss},
          {"lambda", r.lambda},
          {"grad_norm_w", r.grad_norm_w},
          {"grad_norm_lambda", r.grad_norm_lambda},
          {"step_w", r.step_w},
          {"step_lambda", r.step_lambda}};
}

std::string get_string(const Json& doc, const std::string& sec,
                       const std::string& key, const std::string& fallback) {
  if (doc.contains(sec) && doc[sec].contains(key) && doc[sec][key].is_string()) {
    return doc[sec][key].get<std::string>();
  }
  return fallback;
}

}  // namespace

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  if (v.empty()) throw ConfigError("empty vector");
  return v;
}

std::string format_vector(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v[i] == 0.0 ? 0.0 : v[i]);
    out += (i ? "," : "") + std::string(buf);
  }
  return out;
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
  RunConfig c = load_config(args.config);
  if (args.dataset == "prop1") {
    if (get_string(c.doc, "dataset", "kind", "") != "prop1") {
      c.doc["dataset"] = Json{{"kind", "prop1"}};
    }
  } else if (!args.dataset.empty()) {
    c.doc["dataset"] = Json{{"kind", "table"},
                            {"train", fs::absolute(args.dataset).string()}};
  }
  if (args.seed) c.doc["seed"] = *args.seed;
  if (args.iterations) set_value(c, "optimizer", "iterations", *args.iterations);
  if (args.sampler) set_value(c, "optimizer", "sampler", *args.sampler);
  if (args.step_w) set_value(c, "optimizer", "step_w", *args.step_w);
  if (args.step_lambda) set_value(c, "optimizer", "step_lambda", *args.step_lambda);
  if (args.batch) set_value(c, "optimizer", "batch", *args.batch);
  if (args.log_interval) set_value(c, "optimizer", "log_interval", *args.log_interval);
  if (args.radius) set_value(c, "model", "radius", *args.radius);
  if (!args.aggregate.empty()) set_value(c, "eval", "aggregate", args.aggregate);
  if (!args.out_dir.empty()) set_value(c, "output", "dir", fs::absolute(args.out_dir).string());
  if (args.seeds < 1) throw ConfigError("--seeds must be >= 1");

  const std::string hash = config_hash(c);
  const Datasets data = build_datasets(c);
  if (data.test) check_aligned(data.train, *data.test);
  const TrainConfig base = build_train_config(c, data.train);
  const LambdaDomain domain =
      base.lambda_domain ? *base.lambda_domain
                         : LambdaDomain::full_simplex(data.train.num_domains());
  const auto weights =
      aggregate_weights(get_string(c.doc, "eval", "aggregate", "test"), data.train);
  const std::string dir =
      resolve_path(c, get_string(c.doc, "output", "dir", "afl_out"));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");

  const std::uint64_t first_seed = base.seed;
  out << "config_hash " << hash << "  seeds " << first_seed << ".."
      << first_seed + args.seeds - 1 << "\n";

  std::vector<ResultRow> rows;
  std::vector<std::vector<double>> agnostic(0);
  for (const Mode& mode : expand_modes(args.mode, data.train)) {
    ResultRow row{mode.label, {}};
    std::vector<double> losses;
    for (std::size_t i = 0; i < args.seeds; ++i) {
      TrainConfig tc = base;
      tc.seed = first_seed + i;
      const TrainResult r = run_mode(mode, tc, data.train);
      const ModelParams& w = r.output_model();
      const DomainMetrics metrics = evaluate(w, data.evaluation(), weights);
      const double train_agnostic = agnostic_loss(w, domain, data.train).value;
      losses.push_back(train_agnostic);

      const std::string stem = dir + "/" + mode.stem + "_s" + std::to_string(tc.seed);
      save_model(w, stem + ".model",
                 {{"config_hash", hash},
                  {"seed", std::to_string(tc.seed)},
                  {"algorithm", r.algorithm}});
      std::ostringstream jsonl;
      jsonl << Json{{"record", "header"},
                    {"config_hash", hash},
                    {"seed", tc.seed},
                    {"algorithm", r.algorithm},
                    {"iterations", tc.iterations},
                    {"sampler", to_string(tc.sampler)},
                    {"step_w", r.steps.step_w},
                    {"step_lambda", r.steps.step_lambda},
                    {"sigma2_w", r.steps.sigma2_w},
                    {"sigma2_lambda", r.steps.sigma2_lambda},
                    {"grad_bound_w", r.steps.grad_bound_w},
                    {"grad_bound_lambda", r.steps.grad_bound_lambda}}
                   .dump()
            << "\n";
      for (const auto& rec : r.trajectory) jsonl << trajectory_json(rec).dump() << "\n";
      jsonl << Json{{"record", "final"},
                    {"agnostic_loss", train_agnostic},
                    {"lambda", r.output_lambda().vector()},
                    {"train_losses", domain_losses(w, data.train)}}
                   .dump()
            << "\n";
      write_text(stem + ".jsonl", jsonl.str());
      Json mj = Json::parse(metrics_json(metrics));
      mj["config_hash"] = hash;
      mj["seed"] = tc.seed;
      mj["algorithm"] = r.algorithm;
      mj["train_agnostic_loss"] = train_agnostic;
      mj["wall_clock_seconds"] = r.wall_clock_seconds;
      write_text(stem + ".metrics.json", mj.dump(2) + "\n");
      row.runs.push_back(metrics);
    }
    agnostic.push_back(losses);
    rows.push_back(std::move(row));
  }

  const RenderedTable table = render_table(rows);
  const std::string stamp =
      "# config_hash=" + hash + " seeds=" + std::to_string(first_seed) + ".." +
      std::to_string(first_seed + args.seeds - 1) + "\n";
  write_text(dir + "/summary.txt", stamp + table.text);
  write_text(dir + "/summary.csv", stamp + table.csv);
  out << "test accuracy (%)\n" << table.text << "\ntrain agnostic loss\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MeanStd s = mean_std(agnostic[i]);
    out << "  " << rows[i].name << "  " << fixed(s.mean);
    if (agnostic[i].size() > 1) out << " +/- " << fixed(s.stddev);
    out << "\n";
  }
  return 0;
}

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  if (args.model.empty()) throw ConfigError("--model is required");
  if (!fs::exists(args.model)) throw ConfigError("model file not found: " + args.model);
  const ModelParams w = load_model(args.model);
  RunConfig c = load_config(args.config);
  if (args.config.empty()) {
    if (args.data.empty()) throw ConfigError("give --config or --data");
    c.doc["dataset"] = Json{{"kind", "table"},
                            {"train", fs::absolute(args.data).string()},
                            {"num_classes", w.num_classes()}};
  } else if (!args.data.empty()) {
    set_value(c, "dataset", "test", fs::absolute(args.data).string());
  }
  if (!args.aggregate.empty()) set_value(c, "eval", "aggregate", args.aggregate);
  const Datasets data = build_datasets(c);
  const FederatedDataset& test = data.evaluation();
  const DomainMetrics metrics = evaluate(
      w, test, aggregate_weights(get_string(c.doc, "eval", "aggregate", "test"), data.train));
  out << render_table({{"model", {metrics}}}).text << "\nper-domain loss\n";
  for (std::size_t k = 0; k < metrics.losses.size(); ++k) {
    out << "  " << metrics.domain_names[k] << "  " << fixed(metrics.losses[k]) << "\n";
  }
  out << "  worst  " << fixed(metrics.worst_loss) << "\n";

  Json report = Json::parse(metrics_json(metrics));
  if (!args.protected_column.empty()) {
    if (get_string(c.doc, "dataset", "kind", "csv") != "csv") {
      throw ConfigError("--protected-column needs a csv dataset");
    }
    CsvSchema schema = build_csv_schema(c);
    schema.split_rule.reset();
    schema.domain_order.clear();
    schema.domain_column = args.protected_column;
    const Json& d = c.doc["dataset"];
    const std::string file = resolve_path(
        c, d.contains("test") ? d["test"].get<std::string>() : d["train"].get<std::string>());
    const FederatedDataset by_class = load_csv(file, schema);
    const FairnessReport f = fairness_report(w, by_class);
    for (const auto& warning : f.warnings) out << "warning: " << warning << "\n";
    out << "\nprotected class loss (" << args.protected_column << ")\n";
    for (std::size_t i = 0; i < f.losses.size(); ++i) {
      out << "  " << f.class_names[i] << "  " << fixed(f.losses[i]) << "  (n="
          << f.sizes[i] << ")\n";
    }
    out << "  worst " << f.class_names[f.worst_class] << "  " << fixed(f.worst_loss)
        << "  gap " << fixed(f.gap) << "\n";
    report["fairness"] = {{"column", args.protected_column},
                          {"classes", f.class_names},
                          {"losses", f.losses},
                          {"sizes", f.sizes},
                          {"worst_class", f.class_names[f.worst_class]},
                          {"worst_loss", f.worst_loss},
                          {"gap", f.gap}};
  }
  if (!args.out.empty()) {
    report["config_hash"] = config_hash(c);
    write_text(args.out, report.dump(2) + "\n");
  }
  return 0;
}

namespace {

Json report_json(const BoundReport& r) {
  Json terms = Json::array();
  for (const auto& t : r.terms) terms.push_back({{"name", t.name}, {"value", t.value}});
  return {{"variant", r.variant},
          {"empirical_loss", r.empirical_loss},
          {"skewness", r.skewness},
          {"cover_size", r.cover.saturated ? Json("saturated") : Json(r.cover.count)},
          {"log_cover_size", r.cover.log_count},
          {"cover_is_upper_bound", r.cover.is_upper_bound},
          {"complexity_term", r.complexity_term},
          {"epsilon_term", r.epsilon_term},
          {"deviation_term", r.deviation_term},
          {"l1_term", r.l1_term},
          {"total_bound", r.total_bound},
          {"terms", terms}};
}

std::string report_text(const BoundReport& r) {
  std::vector<std::pair<std::string, std::string>> lines = {
      {"variant", r.variant},
      {"skewness", fixed(r.skewness)},
      {"cover size", (r.cover.saturated ? std::string("> 2^64") : std::to_string(r.cover.count)) +
                         (r.cover.is_upper_bound ? " (upper bound)" : "")},
      {"empirical loss", fixed(r.empirical_loss)}};
  for (const auto& t : r.terms) lines.push_back({t.name, fixed(t.value)});
  lines.push_back({"total", fixed(r.total_bound)});
  std::size_t width = 0;
  for (const auto& [k, v] : lines) width = std::max(width, k.size());
  std::string text;
  for (const auto& [k, v] : lines) text += k + std::string(width - k.size() + 2, ' ') + v + "\n";
  return text;
}

}  // namespace

int cmd_bound(const BoundArgs& args, std::ostream& out) {
  RunConfig c = load_config(args.config);
  if (!args.domain_sizes.empty()) set_value(c, "bounds", "domain_sizes", args.domain_sizes);
  if (args.vc_dimension) set_value(c, "bounds", "vc_dimension", *args.vc_dimension);
  if (args.delta) set_value(c, "bounds", "delta", *args.delta);
  if (args.epsilon) set_value(c, "bounds", "epsilon", *args.epsilon);
  if (args.loss_bound) set_value(c, "bounds", "loss_bound", *args.loss_bound);
  if (args.l1_distance) set_value(c, "bounds", "l1_distance", *args.l1_distance);
  if (args.empirical_loss) set_value(c, "bounds", "empirical_loss", *args.empirical_loss);
  if (!args.lambda.empty()) set_value(c, "bounds", "lambda", args.lambda);
  if (!args.rademacher.empty()) set_value(c, "bounds", "rademacher", args.rademacher);
  if (!args.lambda_domain.empty()) {
    Json value = args.lambda_domain;
    if (args.lambda_domain.front() == '{') {
      value = Json::parse(args.lambda_domain, nullptr, false);
      if (value.is_discarded()) throw ConfigError("--lambda-domain is not valid JSON");
    }
    set_value(c, "bounds", "lambda_domain", value);
  }
  if (!args.variant.empty()) set_value(c, "bounds", "variant", args.variant);

  std::optional<Datasets> data;
  const bool need_data = !c.doc.contains("bounds") ||
                         !c.doc["bounds"].contains("domain_sizes");
  if (need_data && c.doc.contains("dataset")) data.emplace(build_datasets(c));
  const BoundInputs inputs = build_bound_inputs(c, data ? &data->train : nullptr);
  const Json& b = c.doc["bounds"];
  const double empirical = b.value("empirical_loss", 0.0);
  const std::string variant = b.value("variant", std::string("max"));

  std::vector<BoundReport> reports;
  const bool all = variant == "all";
  if (all || variant == "max") {
    reports.push_back(theorem1_bound(inputs, empirical, SkewnessVariant::kMaxOverLambda));
  }
  if (all || variant == "per_lambda") {
    if (!all || inputs.lambda) {
      reports.push_back(theorem1_bound(inputs, empirical, SkewnessVariant::kPerLambda));
    }
  }
  if (all || variant == "corollary") {
    if (!all || inputs.l1_distance) reports.push_back(corollary1_bound(inputs, empirical));
  }
  if (all || variant == "perdomain") {
    if (!all || (inputs.lambda && !inputs.rademacher.empty())) {
      reports.push_back(perdomain_bound(inputs, empirical));
    }
  }
  if (reports.empty()) {
    throw ConfigError("variant must be max, per_lambda, corollary, perdomain or all");
  }
  Json j = Json::array();
  for (const auto& r : reports) j.push_back(report_json(r));
  Json doc = {{"config_hash", config_hash(c)}, {"reports", j}};
  if (args.format == "json" || args.format == "both") out << doc.dump(2) << "\n";
  if (args.format == "text" || args.format == "both") {
    for (const auto& r : reports) out << (args.format == "both" ? "\n" : "") << report_text(r);
  }
  if (args.format != "json" && args.format != "text" && args.format != "both") {
    throw ConfigError("--format must be json, text or both");
  }
  return 0;
}

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  if (args.out.empty()) throw ConfigError("--out is required");
  std::optional<FederatedDataset> ds;
  if (args.generator == "prop1") {
    if (args.n < 1) throw ConfigError("--n must be >= 1");
    try {
      ds.emplace(synth_proposition1(args.n, args.allow_odd));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (args.generator == "gaussian") {
    RunConfig c = load_config(args.config);
    set_value(c, "dataset", "kind", "gaussian");
    set_value(c, "dataset", "synth_seed", args.seed);
    ds.emplace(build_datasets(c).train);
  } else {
    throw ConfigError("generator must be prop1 or gaussian");
  }
  write_csv(*ds, args.out);
  out << "wrote " << ds->total_size() << " examples in " << ds->num_domains()
      << " domains to " << args.out << "\n";
  return 0;
}

int cmd_project(const std::string& vector, const std::string& lambda_domain,
                std::ostream& out) {
  const std::vector<double> v = parse_vector(vector);
  if (lambda_domain.empty() || lambda_domain == "simplex") {
    out << format_vector(project_simplex(v)) << "\n";
    return 0;
  }
  const Json parsed = Json::parse(lambda_domain, nullptr, false);
  if (parsed.is_discarded()) throw ConfigError("--lambda-domain is not valid JSON");
  const LambdaDomain domain = parse_lambda_domain(parsed, {});
  out << format_vector(project_lambda(v, domain).vector()) << "\n";
  return 0;
}

int cmd_oracle(const std::string& what, const std::string& argument,
               double resolution, std::ostream& out) {
  if (what == "prop1") {
    const auto a = oracle::prop1_analytics();
    out << "uniform_solution " << fixed(a.uniform_solution, 7) << "\n"
        << "uniform_agnostic_loss " << fixed(a.uniform_agnostic_loss, 7) << "\n"
        << "minimax_value " << fixed(a.minimax_value, 7) << "\n"
        << "gap " << fixed(a.gap, 7) << "\n";
    return 0;
  }
  if (what == "project") {
    const auto v = parse_vector(argument);
    if (v.size() > 16) throw ConfigError("oracle projection supports p <= 16");
    const auto x = oracle::qp_projection_oracle(v);
    out << format_vector(x) << "\nkkt_residual " << oracle::kkt_residual(v, x).max()
        << "\n";
    return 0;
  }
  if (what == "minimax") {
    RunConfig c;
    c.doc["dataset"] = Json{{"kind", "table"}, {"train", fs::absolute(argument).string()}};
    const Datasets data = build_datasets(c);
    try {
      const auto r = oracle::grid_minimax(data.train, {}, resolution);
      out << "value " << fixed(r.value, 9) << "\nargmin " << format_vector(r.argmin)
          << "\nargmax_vertex " << r.argmax_vertex << "\n";
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return 0;
  }
  throw ConfigError("oracle target must be prop1, project or minimax");
}

}  // namespace afl::cli
