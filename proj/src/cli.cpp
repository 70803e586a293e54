#include "per/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "per/checkpoint.hpp"
#include "per/confusion.hpp"
#include "per/errors.hpp"
#include "per/evaluate.hpp"
#include "per/mu_sim.hpp"
#include "per/per_train.hpp"
#include "per/report_json.hpp"

namespace per {

namespace {

using nlohmann::ordered_json;

/// Flat JSON object → CLI11 config items for the selected subcommand.
/// Keys may use '-' or '_'.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      for (const auto* sub : root_->get_subcommands()) item.parents.push_back(sub->get_name());
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      auto scalar = [](const nlohmann::json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
      };
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* root_;
};

struct Common {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool with_out = true) {
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--workers", c.workers, "worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  if (with_out) sub->add_option("--out", c.out, "output path (stdout when omitted)");
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << text;
  if (!f) throw DataError("write failed for " + path);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

Dataset read_data(const std::string& path, bool normalize, std::optional<std::size_t> classes) {
  CsvOptions opts;
  opts.normalize = normalize;
  opts.num_classes = classes;
  return load_csv(path, opts);
}

struct GenDataArgs {
  Common common;
  std::vector<std::size_t> sizes{200, 200, 200, 200, 40};
  std::size_t dim = 2;
  double radius = 1.0;
  double cluster_std = 0.5;
};

struct TrainArgs {
  Common common;
  std::string data;
  std::string val;
  std::string model;  // initial checkpoint (required for finetune-per)
  std::string log;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double sigma = 0.25;
  double gamma = 0.1;
  std::size_t n_noise = 100;
  bool per = false;
  bool no_per = false;
  bool normalize = false;
};

struct CertifyArgs {
  Common common;
  std::string model;
  std::string data;
  std::vector<double> sigma{0.25};
  std::size_t n0 = 100;
  std::size_t n = 1000;
  double alpha = 0.001;
  std::vector<double> radii = kCifarRadii;
  std::string base_model;
  int worst_class = -1;
  std::size_t confusion_noise = 100;
  bool normalize = false;
};

struct MuArgs {
  Common common;
  std::vector<std::size_t> dims{10, 20, 50, 100};
  std::size_t trials = 10000;
  std::string generator = "dirichlet_column";
  std::string csv;
};

struct BoundArgs {
  Common common;
  std::string model;
  std::string data;
  double gamma = 0.1;
  double delta = 0.05;
  bool normalize = false;
};

struct ConfusionArgs {
  Common common;
  std::string model;
  std::string data;
  double gamma = 0.0;
  double sigma = 0.0;
  std::size_t n_noise = 100;
  std::string csv;
  bool normalize = false;
};

int run_gen_data(const GenDataArgs& a, std::ostream& out) {
  SyntheticSpec spec;
  spec.class_sizes = a.sizes;
  spec.dim = a.dim;
  spec.center_radius = a.radius;
  spec.cluster_std = a.cluster_std;
  spec.seed = a.common.seed;
  const Dataset data = generate_synthetic(spec);
  if (a.common.out.empty()) throw ConfigError("gen-data needs --out");
  save_csv(data, a.common.out);
  ordered_json j;
  j["config"] = {{"sizes", a.sizes}, {"dim", a.dim}, {"radius", a.radius},
                 {"cluster_std", a.cluster_std}, {"seed", a.common.seed}, {"out", a.common.out}};
  j["class_counts"] = data.class_counts();
  j["max_row_norm"] = data.max_row_norm();
  out << dump(j);
  return 0;
}

int run_train(const TrainArgs& a, bool finetune, std::ostream& out) {
  if (a.common.out.empty()) throw ConfigError("missing --out for the trained checkpoint");
  PerTrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.gamma = a.gamma;
  cfg.sigma = a.sigma;
  cfg.n_noise_confusion = a.n_noise;
  cfg.sgd = {a.lr, a.momentum, a.weight_decay};
  cfg.hidden = a.hidden;
  cfg.workers = a.common.workers;
  cfg.mode = finetune ? TrainMode::Finetune : TrainMode::Scratch;
  cfg.regularize = finetune ? !a.no_per : a.per;

  std::optional<Network> initial;
  if (!a.model.empty()) initial = load_checkpoint(a.model);
  std::optional<std::size_t> classes;
  if (initial) classes = initial->num_classes();
  const Dataset train = read_data(a.data, a.normalize, classes);
  Dataset val;
  if (!a.val.empty()) val = read_data(a.val, a.normalize, train.num_classes);

  const TrainResult result = smooth_train(train, val, cfg, a.common.seed, initial);
  save_checkpoint(result.network, a.common.out);

  ordered_json config;
  config["command"] = finetune ? "finetune-per" : "train";
  config["data"] = a.data;
  config["val"] = a.val;
  config["model"] = a.model;
  config["out"] = a.common.out;
  config["hidden"] = a.hidden;
  config["epochs"] = a.epochs;
  config["batch_size"] = a.batch_size;
  config["lr"] = a.lr;
  config["momentum"] = a.momentum;
  config["weight_decay"] = a.weight_decay;
  config["sigma"] = a.sigma;
  config["gamma"] = a.gamma;
  config["n_noise"] = a.n_noise;
  config["per"] = cfg.regularize;
  config["normalize"] = a.normalize;
  config["seed"] = a.common.seed;
  std::string log = ordered_json{{"config", config}}.dump() + "\n";
  for (const auto& m : result.log) log += epoch_json(m).dump() + "\n";
  write_text(a.log, log, out);
  return 0;
}

SmoothingConfig smoothing_from(const CertifyArgs& a, double sigma) {
  SmoothingConfig sc;
  sc.sigma = sigma;
  sc.n_selection = a.n0;
  sc.n_estimation = a.n;
  sc.alpha = a.alpha;
  sc.gamma = 0.0;
  return sc;
}

ordered_json certify_config(const CertifyArgs& a) {
  ordered_json c;
  c["model"] = a.model;
  c["data"] = a.data;
  c["sigma"] = a.sigma;
  c["n0"] = a.n0;
  c["n"] = a.n;
  c["alpha"] = a.alpha;
  c["normalize"] = a.normalize;
  c["seed"] = a.common.seed;
  return c;
}

int run_certify(const CertifyArgs& a, std::ostream& out) {
  const Network net = load_checkpoint(a.model);
  const Dataset data = read_data(a.data, a.normalize, net.num_classes());
  if (a.sigma.size() != 1) throw ConfigError("certify takes a single --sigma");
  const auto outcomes = certify_dataset(net, data, smoothing_from(a, a.sigma[0]), a.common.seed, a.common.workers);
  ordered_json j;
  j["config"] = certify_config(a);
  ordered_json records = ordered_json::array();
  for (std::size_t q = 0; q < outcomes.size(); ++q) records.push_back(outcome_json(q, data.labels[q], outcomes[q]));
  j["records"] = std::move(records);
  write_text(a.common.out, dump(j), out);
  return 0;
}

int run_evaluate(const CertifyArgs& a, std::ostream& out) {
  const Network net = load_checkpoint(a.model);
  const Dataset data = read_data(a.data, a.normalize, net.num_classes());
  EvalConfig cfg;
  cfg.smoothing = smoothing_from(a, a.sigma.front());
  cfg.sigmas = a.sigma;
  cfg.radii = a.radii;
  cfg.seed = a.common.seed;
  cfg.workers = a.common.workers;
  cfg.confusion_noise = a.confusion_noise;
  if (a.worst_class >= 0) {
    cfg.worst_class = static_cast<std::size_t>(a.worst_class);
  } else if (!a.base_model.empty()) {
    cfg.worst_class = identify_worst_class(load_checkpoint(a.base_model), data);
  }
  const EvalReport report = evaluate_certified(net, data, cfg);
  ordered_json j;
  ordered_json c = certify_config(a);
  c["radii"] = a.radii;
  c["base_model"] = a.base_model;
  c["worst_class"] = a.worst_class;
  c["confusion_noise"] = a.confusion_noise;
  j["config"] = std::move(c);
  const ordered_json body = eval_report_json(report);
  for (const auto& [k, v] : body.items()) j[k] = v;
  j["phi"] = phi_diagnostic(net, data.max_row_norm());
  write_text(a.common.out, dump(j), out);
  return 0;
}

int run_simulate_mu(const MuArgs& a, std::ostream& out) {
  MuSimConfig cfg;
  cfg.dims = a.dims;
  cfg.trials = a.trials;
  cfg.generator = parse_mu_generator(a.generator);
  cfg.seed = a.common.seed;
  cfg.workers = a.common.workers;
  cfg.keep_samples = !a.csv.empty();
  const MuSimReport report = run_mu_simulation(cfg);
  ordered_json j;
  j["config"] = {{"dims", a.dims}, {"trials", a.trials}, {"generator", a.generator}, {"seed", a.common.seed}};
  const ordered_json body = mu_report_json(report);
  for (const auto& [k, v] : body.items()) j[k] = v;
  write_text(a.common.out, dump(j), out);
  if (!a.csv.empty()) {
    std::ostringstream csv;
    csv << "dim,trial,mu\n" << std::setprecision(17);
    for (const auto& s : report.per_dim)
      for (std::size_t t = 0; t < s.samples.size(); ++t) csv << s.dim << ',' << t << ',' << s.samples[t] << '\n';
    write_text(a.csv, csv.str(), out);
  }
  return 0;
}

int run_bound(const BoundArgs& a, std::ostream& out) {
  const Network net = load_checkpoint(a.model);
  const Dataset data = read_data(a.data, a.normalize, net.num_classes());
  const BoundDiagnostics b = bound_diagnostics(net, data, a.gamma, a.delta);
  ordered_json j;
  j["config"] = {{"model", a.model}, {"data", a.data}, {"gamma", a.gamma}, {"delta", a.delta},
                 {"normalize", a.normalize}};
  const ordered_json body = bound_json(b);
  for (const auto& [k, v] : body.items()) j[k] = v;
  write_text(a.common.out, dump(j), out);
  return 0;
}

int run_confusion(const ConfusionArgs& a, std::ostream& out) {
  const Network net = load_checkpoint(a.model);
  const Dataset data = read_data(a.data, a.normalize, net.num_classes());
  const ConfusionMatrix c =
      a.sigma > 0.0 ? build_smoothed_confusion_matrix(net, data, a.gamma, a.sigma, a.n_noise,
                                                      RngStream::make(a.common.seed, StreamDomain::EvalConfusion),
                                                      a.common.workers)
                    : build_margin_confusion_matrix(net, data, a.gamma);
  const auto t = top_singular_triple(c);
  ordered_json j;
  j["config"] = {{"model", a.model}, {"data", a.data}, {"gamma", a.gamma}, {"sigma", a.sigma},
                 {"n_noise", a.n_noise}, {"seed", a.common.seed}, {"normalize", a.normalize}};
  j["sigma_max"] = t.sigma_max;
  j["max_column_sum"] = max_column_sum(c);
  j["mu"] = t.degenerate ? ordered_json(nullptr) : ordered_json(max_column_sum(c) / t.sigma_max);
  j["degenerate"] = t.degenerate;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < c.dim(); ++i) rows.emplace_back(c.entries().row(i).begin(), c.entries().row(i).end());
  j["matrix"] = rows;
  write_text(a.common.out, dump(j), out);
  if (!a.csv.empty()) write_confusion_csv(c, a.csv);
  return 0;
}

void add_data_options(CLI::App* sub, std::string& model, std::string& data, bool& normalize) {
  sub->add_option("--model", model, "checkpoint path")->required();
  sub->add_option("--data", data, "CSV dataset")->required();
  sub->add_flag("--normalize", normalize, "scale features so the largest row norm is 1");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized-smoothing certification and principal-eigenvalue regularized training", "per"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "flat JSON object of flag values (command line wins)");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic Gaussian-cluster dataset");
  add_common(gen_cmd, gen.common);
  gen_cmd->add_option("--sizes", gen.sizes, "samples per class")->delimiter(',')->capture_default_str();
  gen_cmd->add_option("--dim", gen.dim, "feature dimension")->capture_default_str();
  gen_cmd->add_option("--radius", gen.radius, "radius of the circle of class centers")->capture_default_str();
  gen_cmd->add_option("--cluster-std", gen.cluster_std, "per-class Gaussian spread")->capture_default_str();

  TrainArgs train;
  TrainArgs tune;
  tune.epochs = 10;
  tune.lr = 0.001;
  tune.batch_size = 256;
  auto train_options = [](CLI::App* sub, TrainArgs& t) {
    add_common(sub, t.common);
    sub->add_option("--data", t.data, "training CSV")->required();
    sub->add_option("--val", t.val, "validation CSV");
    sub->add_option("--log", t.log, "JSON-lines training log (stdout when omitted)");
    sub->add_option("--epochs", t.epochs)->capture_default_str();
    sub->add_option("--batch-size", t.batch_size)->capture_default_str();
    sub->add_option("--lr", t.lr)->capture_default_str();
    sub->add_option("--momentum", t.momentum)->capture_default_str();
    sub->add_option("--weight-decay", t.weight_decay)->capture_default_str();
    sub->add_option("--sigma", t.sigma, "training noise std")->capture_default_str();
    sub->add_option("--gamma", t.gamma, "margin of the confusion pass")->capture_default_str();
    sub->add_option("--n-noise", t.n_noise, "noise draws per sample in the confusion pass")->capture_default_str();
    sub->add_flag("--normalize", t.normalize);
  };
  auto* train_cmd = app.add_subcommand("train", "smooth training from scratch");
  train_options(train_cmd, train);
  train_cmd->add_option("--hidden", train.hidden, "hidden layer widths")->delimiter(',')->capture_default_str();
  train_cmd->add_option("--model", train.model, "start from this checkpoint instead of a fresh network");
  train_cmd->add_flag("--per", train.per, "enable the principal-eigenvalue regularizer");

  auto* tune_cmd = app.add_subcommand("finetune-per", "fine-tune a checkpoint with the principal-eigenvalue regularizer");
  train_options(tune_cmd, tune);
  tune_cmd->add_option("--model", tune.model, "checkpoint to fine-tune")->required();
  tune_cmd->add_flag("--no-per", tune.no_per, "disable the regularizer (control run)");

  CertifyArgs cert;
  auto* cert_cmd = app.add_subcommand("certify", "certify every sample of a dataset");
  add_common(cert_cmd, cert.common);
  add_data_options(cert_cmd, cert.model, cert.data, cert.normalize);
  cert_cmd->add_option("--sigma", cert.sigma, "smoothing noise std")->capture_default_str();
  cert_cmd->add_option("--n0", cert.n0, "selection samples")->capture_default_str();
  cert_cmd->add_option("--n", cert.n, "estimation samples")->capture_default_str();
  cert_cmd->add_option("--alpha", cert.alpha, "certificate failure probability")->capture_default_str();

  CertifyArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "certified accuracy per radius and worst-class metrics");
  add_common(eval_cmd, eval.common);
  add_data_options(eval_cmd, eval.model, eval.data, eval.normalize);
  eval_cmd->add_option("--sigma", eval.sigma, "smoothing noise std list")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--radii", eval.radii, "radius grid")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--n0", eval.n0)->capture_default_str();
  eval_cmd->add_option("--n", eval.n)->capture_default_str();
  eval_cmd->add_option("--alpha", eval.alpha)->capture_default_str();
  eval_cmd->add_option("--base-model", eval.base_model, "model whose clean accuracy designates the worst class");
  eval_cmd->add_option("--worst-class", eval.worst_class, "designated worst class (overrides --base-model)");
  eval_cmd->add_option("--confusion-noise", eval.confusion_noise)->capture_default_str();

  MuArgs mu;
  auto* mu_cmd = app.add_subcommand("simulate-mu", "distribution of mu over random confusion matrices");
  add_common(mu_cmd, mu.common);
  mu_cmd->add_option("--dims", mu.dims)->delimiter(',')->capture_default_str();
  mu_cmd->add_option("--trials", mu.trials)->capture_default_str();
  mu_cmd->add_option("--generator", mu.generator)
      ->check(CLI::IsMember({"dirichlet_column", "uniform_rescaled", "uniform_iid"}))
      ->capture_default_str();
  mu_cmd->add_option("--csv", mu.csv, "raw mu values for box plots");

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand("bound", "weight-norm factor and worst-class bound scale");
  add_common(bound_cmd, bound.common);
  add_data_options(bound_cmd, bound.model, bound.data, bound.normalize);
  bound_cmd->add_option("--gamma", bound.gamma)->capture_default_str();
  bound_cmd->add_option("--delta", bound.delta)->capture_default_str();

  ConfusionArgs conf;
  auto* conf_cmd = app.add_subcommand("confusion-report", "confusion matrix, sigma_max, max column sum and mu");
  add_common(conf_cmd, conf.common);
  add_data_options(conf_cmd, conf.model, conf.data, conf.normalize);
  conf_cmd->add_option("--gamma", conf.gamma)->capture_default_str();
  conf_cmd->add_option("--sigma", conf.sigma, "0 selects the deterministic margin matrix")->capture_default_str();
  conf_cmd->add_option("--n-noise", conf.n_noise)->capture_default_str();
  conf_cmd->add_option("--csv", conf.csv, "CSV export of the matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*gen_cmd) return run_gen_data(gen, out);
    if (*train_cmd) return run_train(train, false, out);
    if (*tune_cmd) return run_train(tune, true, out);
    if (*cert_cmd) return run_certify(cert, out);
    if (*eval_cmd) return run_evaluate(eval, out);
    if (*mu_cmd) return run_simulate_mu(mu, out);
    if (*bound_cmd) return run_bound(bound, out);
    if (*conf_cmd) return run_confusion(conf, out);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace per
