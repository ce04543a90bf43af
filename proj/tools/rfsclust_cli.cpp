// rfsclust: clustering of point-pattern data.
//
//   rfsclust gen  --preset separated --seed 7 --out d.jsonl [--truth-out truth.csv]
//   rfsclust dist --metric ospa --p 2 --c 20 --in d.jsonl --out D.csv
//   rfsclust ap   --in D.csv --preference median --out labels.csv
//   rfsclust em   --in d.jsonl --k 3 --iters 30 --seed 1 --out labels.csv --model-out m.json --trace-out t.csv
//   rfsclust eval labels.csv truth.csv

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfsclust/rfsclust.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rfsclust;

namespace {

void log_config(const json& config) { std::cerr << config.dump() << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

void write_sidecar(const fs::path& output, const json& meta) {
  write_text(fs::path(output.string() + ".meta.json"), meta.dump(2) + "\n");
}

void write_labels(const fs::path& path, const std::vector<std::string>& ids, const std::vector<std::size_t>& labels) {
  std::vector<std::string> text;
  for (auto l : labels) text.push_back(std::to_string(l));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  write_labels_csv(ids, text, out);
}

json diagnostics_json(const ClusteringResult& r) {
  json d = json::object();
  for (const auto& [k, v] : r.diagnostics) d[k] = v;
  return d;
}

GenSpec read_gen_spec(const fs::path& path, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  GenSpec spec;
  spec.rng_seed = seed;
  try {
    json j;
    in >> j;
    spec.patterns_per_component = j.value("patterns_per_component", std::size_t{100});
    for (const auto& jc : j.at("components")) {
      GenComponent c;
      c.lambda = jc.at("lambda").get<double>();
      const auto mean = jc.at("mean").get<std::vector<double>>();
      const auto cov = jc.at("covariance").get<std::vector<double>>();
      const auto d = static_cast<Eigen::Index>(mean.size());
      if (cov.size() != mean.size() * mean.size())
        throw Error(ErrorCode::ParseError, "covariance must have dim*dim entries (row-major)");
      c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
      c.covariance.resize(d, d);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index k = 0; k < d; ++k) c.covariance(r, k) = cov[static_cast<std::size_t>(r * d + k)];
      spec.components.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed generator spec: ") + e.what());
  }
  return spec;
}

json gen_spec_json(const GenSpec& spec) {
  json comps = json::array();
  for (const auto& c : spec.components) {
    std::vector<double> cov;
    for (Eigen::Index r = 0; r < c.covariance.rows(); ++r)
      for (Eigen::Index k = 0; k < c.covariance.cols(); ++k) cov.push_back(c.covariance(r, k));
    comps.push_back({{"lambda", c.lambda},
                     {"mean", std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size())},
                     {"covariance", cov}});
  }
  return {{"patterns_per_component", spec.patterns_per_component}, {"seed", spec.rng_seed}, {"components", comps}};
}

DistanceSpec make_spec(const std::string& metric, double p, std::optional<double> c) {
  DistanceSpec spec;
  spec.kind = parse_distance_kind(metric);
  spec.order = p;
  if (spec.kind == DistanceKind::Ospa) {
    if (!c) throw CLI::ValidationError("--c", "the OSPA cut-off --c is required for --metric ospa");
    spec.cutoff = *c;
  }
  spec.validate();
  return spec;
}

json spec_json(const DistanceSpec& spec) {
  json j{{"metric", to_string(spec.kind)}, {"base", "euclidean"}};
  if (spec.kind != DistanceKind::Hausdorff) j["p"] = spec.order;
  if (spec.kind == DistanceKind::Ospa) j["c"] = spec.cutoff;
  return j;
}

// Labels from a labels CSV, or from the "label" fields of a dataset file.
LabelTable read_any_labels(const fs::path& path) {
  if (path.extension() == ".jsonl") {
    const auto data = read_dataset(path);
    if (!data.labels) throw Error(ErrorCode::ParseError, "'" + path.string() + "' carries no labels");
    LabelTable t;
    for (std::size_t i = 0; i < data.size(); ++i) t.ids.push_back(data.id(i));
    t.labels = *data.labels;
    return t;
  }
  return read_labels_csv(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering of point-pattern data with set distances and RFS mixtures"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a labelled dataset from a Poisson-RFS mixture");
  std::string gen_preset, gen_spec_path, gen_out, gen_truth;
  std::uint64_t gen_seed = 0;
  std::size_t gen_per = 100;
  auto* preset_opt = gen->add_option("--preset", gen_preset, "Preset name")
                         ->check(CLI::IsMember(preset_names()));
  gen->add_option("--spec", gen_spec_path, "Generator spec JSON file")->excludes(preset_opt)->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_option("--per-component", gen_per, "Patterns per component (presets)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output dataset (.jsonl)")->required();
  gen->add_option("--truth-out", gen_truth, "Also write ground-truth labels CSV");

  // dist
  auto* dist = app.add_subcommand("dist", "Pairwise set-distance matrix");
  std::string dist_in, dist_out, dist_metric;
  double dist_p = 2.0;
  std::optional<double> dist_c;
  unsigned dist_threads = std::max(1u, std::thread::hardware_concurrency());
  dist->add_option("--in", dist_in, "Input dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  dist->add_option("--out", dist_out, "Output matrix CSV")->required();
  dist->add_option("--metric", dist_metric, "hausdorff | wasserstein | ospa")
      ->required()
      ->check(CLI::IsMember({"hausdorff", "wasserstein", "ospa"}));
  dist->add_option("--p", dist_p, "Order for wasserstein/ospa")->capture_default_str();
  dist->add_option("--c", dist_c, "OSPA cut-off (required for ospa)");
  dist->add_option("--threads", dist_threads, "Worker threads")->check(CLI::PositiveNumber);

  // ap
  auto* ap = app.add_subcommand("ap", "Affinity propagation on a dissimilarity matrix");
  std::string ap_in, ap_dataset, ap_out, ap_metric, ap_pref = "median";
  double ap_p = 2.0;
  std::optional<double> ap_c;
  ApConfig ap_cfg;
  auto* ap_in_opt = ap->add_option("--in", ap_in, "Dissimilarity matrix CSV")->check(CLI::ExistingFile);
  auto* ap_data_opt = ap->add_option("--dataset", ap_dataset, "Dataset (.jsonl); distances computed on the fly")
                          ->check(CLI::ExistingFile)
                          ->excludes(ap_in_opt);
  ap->add_option("--metric", ap_metric, "Metric when --dataset is given")
      ->check(CLI::IsMember({"hausdorff", "wasserstein", "ospa"}))
      ->needs(ap_data_opt);
  ap->add_option("--p", ap_p, "Order for wasserstein/ospa")->capture_default_str();
  ap->add_option("--c", ap_c, "OSPA cut-off");
  ap->add_option("--preference", ap_pref, "Preference value or 'median'")->capture_default_str();
  ap->add_option("--damping", ap_cfg.damping, "Damping in [0.5, 1)")->capture_default_str();
  ap->add_option("--max-iter", ap_cfg.max_iterations, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  ap->add_option("--window", ap_cfg.convergence_window, "Sweeps of unchanged exemplars before stopping")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ap->add_option("--out", ap_out, "Output labels CSV")->required();

  // em
  auto* em = app.add_subcommand("em", "EM fit of an iid-cluster RFS mixture and MAP labels");
  std::string em_in, em_out, em_model, em_trace, em_family = "poisson";
  EmConfig em_cfg;
  em_cfg.n_iterations = 30;
  em->add_option("--in", em_in, "Input dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  em->add_option("--k", em_cfg.n_components, "Number of components")->required()->check(CLI::PositiveNumber);
  em->add_option("--iters", em_cfg.n_iterations, "Maximum EM iterations")->check(CLI::PositiveNumber)->capture_default_str();
  em->add_option("--cardinality", em_family, "poisson | categorical")
      ->check(CLI::IsMember({"poisson", "categorical"}))
      ->capture_default_str();
  em->add_option("--seed", em_cfg.rng_seed, "Initialization seed")->capture_default_str();
  em->add_option("--min-weight", em_cfg.min_weight, "Component weight floor")->capture_default_str();
  em->add_option("--n-card", em_cfg.n_card, "Categorical support upper bound (default: max cardinality)");
  em->add_flag("--literal-covariance", em_cfg.literal_double_sum_covariance,
               "Weight per-pattern scatter by cardinality in the covariance update");
  em->add_option("--out", em_out, "Output labels CSV")->required();
  em->add_option("--model-out", em_model, "Output model JSON");
  em->add_option("--trace-out", em_trace, "Output log-likelihood trace CSV");

  // eval
  auto* ev = app.add_subcommand("eval", "Rand index between two labelings");
  std::string ev_pred, ev_truth;
  ev->add_option("predicted", ev_pred, "Predicted labels CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("truth", ev_truth, "Ground-truth labels CSV or labelled .jsonl dataset")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      if (gen_preset.empty() && gen_spec_path.empty())
        throw CLI::ValidationError("gen", "one of --preset or --spec is required");
      GenSpec spec = gen_preset.empty() ? read_gen_spec(gen_spec_path, gen_seed) : preset(gen_preset, gen_seed, gen_per);
      json config{{"command", "gen"}, {"preset", gen_preset}, {"spec_file", gen_spec_path},
                  {"out", gen_out},   {"truth_out", gen_truth}, {"generator", gen_spec_json(spec)}};
      log_config(config);
      const auto data = generate_dataset(spec);
      write_dataset(data, fs::path(gen_out));
      write_sidecar(gen_out, config);
      if (!gen_truth.empty()) {
        std::ofstream out(gen_truth, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot open '" + gen_truth + "' for writing");
        write_labels_csv(data.ids, *data.labels, out);
      }
    } else if (*dist) {
      const auto spec = make_spec(dist_metric, dist_p, dist_c);
      json config{{"command", "dist"}, {"in", dist_in}, {"out", dist_out}, {"spec", spec_json(spec)},
                  {"threads", dist_threads}};
      log_config(config);
      const auto data = read_dataset(fs::path(dist_in));
      write_dissimilarity_csv(pairwise_dissimilarity(data, spec, dist_threads), fs::path(dist_out));
    } else if (*ap) {
      if (ap_in.empty() && ap_dataset.empty()) throw CLI::ValidationError("ap", "one of --in or --dataset is required");
      if (ap_pref != "median") {
        try {
          ap_cfg.preference = parse_double(ap_pref);
        } catch (const std::exception&) {
          throw CLI::ValidationError("--preference", "expected a number or 'median'");
        }
      }
      ap_cfg.validate();
      DissimilarityMatrix d;
      json config{{"command", "ap"},          {"out", ap_out},
                  {"preference", ap_pref},    {"damping", ap_cfg.damping},
                  {"max_iterations", ap_cfg.max_iterations}, {"convergence_window", ap_cfg.convergence_window}};
      if (!ap_in.empty()) {
        config["in"] = ap_in;
        log_config(config);
        d = read_dissimilarity_csv(fs::path(ap_in));
      } else {
        if (ap_metric.empty()) throw CLI::ValidationError("--metric", "--metric is required with --dataset");
        const auto spec = make_spec(ap_metric, ap_p, ap_c);
        config["dataset"] = ap_dataset;
        config["spec"] = spec_json(spec);
        log_config(config);
        d = pairwise_dissimilarity(read_dataset(fs::path(ap_dataset)), spec,
                                   std::max(1u, std::thread::hardware_concurrency()));
      }
      const auto s = similarity_from_dissimilarity(d, ap_cfg.preference);
      const auto result = run_ap(s, ap_cfg);
      write_labels(ap_out, d.ids, result.hard_labels);
      json meta = config;
      meta["distance"] = spec_json(d.spec);
      meta["resolved_preference"] = s.rows() ? s(0, 0) : 0.0;
      std::vector<std::string> exemplar_ids;
      for (auto k : *result.exemplars) exemplar_ids.push_back(d.ids[k]);
      meta["exemplars"] = exemplar_ids;
      meta["diagnostics"] = diagnostics_json(result);
      write_sidecar(ap_out, meta);
    } else if (*em) {
      em_cfg.cardinality_family = parse_cardinality_family(em_family);
      em_cfg.validate();
      json config{{"command", "em"},
                  {"in", em_in},
                  {"out", em_out},
                  {"model_out", em_model},
                  {"trace_out", em_trace},
                  {"k", em_cfg.n_components},
                  {"iters", em_cfg.n_iterations},
                  {"cardinality", em_family},
                  {"seed", em_cfg.rng_seed},
                  {"init", em_cfg.init},
                  {"min_weight", em_cfg.min_weight},
                  {"n_card", em_cfg.n_card},
                  {"tolerance", em_cfg.tolerance},
                  {"patience", em_cfg.patience},
                  {"literal_covariance", em_cfg.literal_double_sum_covariance}};
      log_config(config);
      const auto data = read_dataset(fs::path(em_in));
      const auto fit = fit_em(data, em_cfg);
      const auto result = map_assign(data, fit.model);
      write_labels(em_out, data.ids, result.hard_labels);
      json meta = config;
      meta["iterations_run"] = fit.trace.log_likelihood.size();
      meta["initial_log_likelihood"] = fit.trace.initial_log_likelihood;
      meta["final_log_likelihood"] = fit.trace.log_likelihood.back();
      meta["diagnostics"] = diagnostics_json(result);
      write_sidecar(em_out, meta);
      if (!em_model.empty()) {
        write_model(fit.model, fs::path(em_model));
        write_sidecar(em_model, config);
      }
      if (!em_trace.empty()) {
        std::string text = "iteration,log_likelihood\n0," + format_double(fit.trace.initial_log_likelihood) + "\n";
        for (std::size_t i = 0; i < fit.trace.log_likelihood.size(); ++i)
          text += std::to_string(i + 1) + "," + format_double(fit.trace.log_likelihood[i]) + "\n";
        write_text(em_trace, text);
        write_sidecar(em_trace, config);
      }
    } else if (*ev) {
      log_config({{"command", "eval"}, {"predicted", ev_pred}, {"truth", ev_truth}});
      const auto pred = read_any_labels(ev_pred);
      const auto truth = read_any_labels(ev_truth);
      std::map<std::string, std::string> truth_by_id;
      for (std::size_t i = 0; i < truth.ids.size(); ++i)
        if (!truth_by_id.emplace(truth.ids[i], truth.labels[i]).second)
          throw Error(ErrorCode::ParseError, "duplicate id '" + truth.ids[i] + "' in " + ev_truth);
      if (truth_by_id.size() != pred.ids.size())
        throw Error(ErrorCode::LengthMismatch, "label files cover different numbers of ids");
      std::vector<std::string> matched;
      for (const auto& id : pred.ids) {
        auto it = truth_by_id.find(id);
        if (it == truth_by_id.end()) throw Error(ErrorCode::LengthMismatch, "id '" + id + "' missing from " + ev_truth);
        matched.push_back(it->second);
      }
      std::printf("%.10g\n", rand_index(pred.labels, matched));
    }
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
