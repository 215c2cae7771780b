#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asclens/archive.hpp"
#include "asclens/attention.hpp"
#include "asclens/dataset.hpp"
#include "asclens/error.hpp"
#include "asclens/fixtures.hpp"
#include "asclens/gdv.hpp"
#include "asclens/parallel.hpp"
#include "asclens/probe.hpp"
#include "asclens/projection.hpp"
#include "asclens/report.hpp"
#include "asclens/rng.hpp"

#ifndef ASCLENS_VERSION
#define ASCLENS_VERSION "0.0.0"
#endif

namespace asclens::cli {

std::string_view tool_version() noexcept { return ASCLENS_VERSION; }

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Raised by a subcommand whose input failed validation; maps to exit 1.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for argument problems discovered after parsing; maps to exit 2.
struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw Error(Errc::io_failure, "failed writing " + path.string());
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      parts.push_back(current);
      current.clear();
    } else if (c != ' ') {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

// Layer selection: `all` or a comma list of indices and inclusive `a-b`
// ranges. Returns nullopt for `all`.
std::optional<std::vector<std::pair<std::size_t, std::size_t>>> parse_layer_ranges(
    const std::string& text) {
  if (text == "all") return std::nullopt;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& part : split_commas(text)) {
    const auto dash = part.find('-');
    const std::string lo = part.substr(0, dash);
    const std::string hi = dash == std::string::npos ? lo : part.substr(dash + 1);
    auto digits = [](const std::string& s) {
      return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!digits(lo) || !digits(hi)) throw UsageFailure("bad layer selection '" + text + "'");
    const auto a = std::stoul(lo);
    const auto b = std::stoul(hi);
    if (a > b) throw UsageFailure("empty layer range '" + part + "'");
    ranges.emplace_back(a, b);
  }
  return ranges;
}

std::vector<std::size_t> resolve_layers(const std::string& text, std::size_t first, std::size_t last) {
  const auto ranges = parse_layer_ranges(text);
  std::vector<std::size_t> layers;
  if (!ranges) {
    for (std::size_t l = first; l <= last; ++l) layers.push_back(l);
    return layers;
  }
  for (const auto& [a, b] : *ranges) {
    if (a < first || b > last) {
      throw Error(Errc::invalid_argument, "layer selection '" + text + "' outside [" + std::to_string(first) +
                                              ", " + std::to_string(last) + "]");
    }
    for (std::size_t l = a; l <= b; ++l) layers.push_back(l);
  }
  std::sort(layers.begin(), layers.end());
  layers.erase(std::unique(layers.begin(), layers.end()), layers.end());
  return layers;
}

std::vector<ProjectionMethod> parse_methods(const std::string& text) {
  std::vector<ProjectionMethod> methods;
  for (const auto& m : split_commas(text)) {
    if (m == "mds") {
      methods.push_back(ProjectionMethod::mds);
    } else if (m == "tsne") {
      methods.push_back(ProjectionMethod::tsne);
    } else {
      throw UsageFailure("unknown projection method '" + m + "' (expected mds or tsne)");
    }
  }
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
  return methods;
}

const CLI::Validator kRoleList(
    [](std::string& value) {
      try {
        parse_role_list(value);
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "ROLE[,ROLE...]", "role list");

const CLI::Validator kLayerSpec(
    [](std::string& value) {
      try {
        parse_layer_ranges(value);
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "all|L[,L-M...]", "layer selection");

const CLI::Validator kMethodList(
    [](std::string& value) {
      try {
        parse_methods(value);
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "mds|tsne[,...]", "projection methods");

std::string fixed_name(ProjectionMethod method, TokenRole role, std::size_t layer) {
  return std::string(to_string(method)) + "_" + std::string(to_string(role)) + "_L" + std::to_string(layer);
}

// ---- analysis stages shared by the single-purpose subcommands and `all`

struct AnalysisSettings {
  std::string roles = "CLS,DET,SUBJ,VERB,OBJ";
  std::string layers = "all";
  std::string projection = "mds,tsne";
  std::string projection_roles = "CLS";
  std::string projection_layers = "all";
  double perplexity = 100.0;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  double lambda = 1e-4;
  std::size_t epochs = 20;
  std::string attention_roles = "CLS,DET,SUBJ,VERB,OBJ";
  bool include_self = false;
  std::string variance = "population";
};

void stage_gdv(const ActivationArchive& archive, const std::string& roles, const std::string& layers,
               const fs::path& out_dir, std::ostream& log) {
  const auto role_list = canonical_roles(parse_role_list(roles));
  const auto layer_list = resolve_layers(layers, 0, archive.n_layers());
  const auto table = gdv_sweep(archive, role_list, layer_list);
  write_text(out_dir / "gdv.csv", gdv_table_to_csv(table));
  log << "wrote " << (out_dir / "gdv.csv").string() << " (" << table.entries.size() << " rows)\n";
}

void stage_project(const ActivationArchive& archive, ProjectionMethod method, const std::string& roles,
                   const std::string& layers, const TsneParams& params, const fs::path& out_dir,
                   std::ostream& log) {
  const auto role_list = canonical_roles(parse_role_list(roles));
  const auto layer_list = resolve_layers(layers, 0, archive.n_layers());
  for (TokenRole role : role_list) {
    for (std::size_t layer : layer_list) {
      const RoleSlice slice = slice_role(archive, role, layer);
      const Embedding2D embedding = method == ProjectionMethod::mds
                                        ? classical_mds(pairwise_distances(slice.features), 2)
                                        : tsne(slice.features, params);
      const fs::path path = out_dir / (fixed_name(method, role, layer) + ".csv");
      write_text(path, embedding_to_csv(embedding, slice.sentence_ids, slice.labels));
      log << "wrote " << path.string() << "\n";
    }
  }
}

void stage_probe(const ActivationArchive& archive, const std::string& roles, const std::string& layers,
                 const ProbeOptions& options, const fs::path& out_dir, std::ostream& log) {
  const auto role_list = canonical_roles(parse_role_list(roles));
  const auto layer_list = resolve_layers(layers, 0, archive.n_layers());
  const auto results = probe_sweep(archive, role_list, layer_list, options);
  write_text(out_dir / "probe_folds.csv", probe_folds_to_csv(results));
  write_text(out_dir / "probe_confusion.csv", probe_confusion_to_csv(results));
  log << "wrote " << (out_dir / "probe_folds.csv").string() << " and probe_confusion.csv (" << results.size()
      << " cells)\n";
}

void stage_attention(const ActivationArchive& archive, const std::string& roles,
                     const AttentionOptions& options, const fs::path& out_dir, std::ostream& log) {
  const auto role_list = canonical_roles(parse_role_list(roles));
  const auto stats = attention_sweep(archive, role_list, options);
  write_text(out_dir / "attention_heads.csv", attention_heads_to_csv(stats));
  write_text(out_dir / "attention_layer_mean.csv", attention_layer_mean_to_csv(stats));
  for (const auto& note : stats.notes) log << "note: " << note << "\n";
  log << "wrote " << (out_dir / "attention_heads.csv").string() << " and attention_layer_mean.csv\n";
}

std::string scatter_title(const std::string& stem) {
  // stem: <method>_<ROLE>_L<layer>
  const auto first = stem.find('_');
  const auto last = stem.rfind("_L");
  if (first == std::string::npos || last == std::string::npos || last <= first) return stem;
  const std::string prefix = stem.substr(0, first);
  const std::string method = prefix == "tsne" ? "t-SNE" : prefix == "mds" ? "MDS" : prefix;
  return method + " of " + stem.substr(first + 1, last - first - 1) + " activations, layer " +
         stem.substr(last + 2);
}

// Renders every figure whose source CSVs exist in `in_dir`. Returns the
// number of SVG files written.
std::size_t stage_report(const fs::path& in_dir, const fs::path& out_dir, std::ostream& log) {
  if (!fs::is_directory(in_dir)) throw Error(Errc::missing_file, "no such directory " + in_dir.string());
  std::size_t written = 0;
  auto emit = [&](const std::string& name, const std::string& svg) {
    write_text(out_dir / name, svg);
    log << "wrote " << (out_dir / name).string() << "\n";
    ++written;
  };

  if (fs::exists(in_dir / "gdv.csv")) {
    const GdvTable table = gdv_table_from_csv(read_text(in_dir / "gdv.csv"));
    LineSeries series;
    for (const auto& [key, value] : table.entries) {
      series[key.second].emplace_back(static_cast<double>(key.first), value);
    }
    emit("gdv.svg", render_line(series, "GDV", "GDV of hidden layer activations"));
  }

  if (fs::exists(in_dir / "probe_folds.csv") && fs::exists(in_dir / "probe_confusion.csv")) {
    const auto results = probe_results_from_csv(read_text(in_dir / "probe_folds.csv"),
                                                read_text(in_dir / "probe_confusion.csv"));
    LineSeries series;
    for (const auto& r : results) {
      series[r.role].emplace_back(static_cast<double>(r.layer), r.mean_accuracy);
    }
    emit("probe_accuracy.svg", render_line(series, "accuracy", "Probe accuracy of hidden layers"));
  }

  if (fs::exists(in_dir / "attention_heads.csv") && fs::exists(in_dir / "attention_layer_mean.csv")) {
    const AttentionStats stats = attention_stats_from_csv(read_text(in_dir / "attention_heads.csv"),
                                                          read_text(in_dir / "attention_layer_mean.csv"));
    std::vector<TokenRole> roles;
    for (const auto& [key, cell] : stats.entries) roles.push_back(std::get<2>(key));
    roles = canonical_roles(std::move(roles));
    for (TokenRole role : roles) {
      emit("attention_fdr_" + std::string(to_string(role)) + ".svg", render_fdr_dots(stats, role));
    }
  }

  std::vector<fs::path> embeddings;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        (name.starts_with("mds_") || name.starts_with("tsne_"))) {
      embeddings.push_back(entry.path());
    }
  }
  std::sort(embeddings.begin(), embeddings.end());
  for (const auto& path : embeddings) {
    const EmbeddingRows rows = embedding_from_csv(read_text(path));
    const std::string stem = path.stem().string();
    emit(stem + ".svg", render_scatter(rows.coords, rows.labels, scatter_title(stem)));
  }
  return written;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- `all --config FILE`: config entries become `--key=value` tokens placed
// before the user's own flags, so explicit flags win.

std::optional<std::string> find_config_path(const std::vector<std::string>& args, std::size_t from) {
  for (std::size_t i = from; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return std::nullopt;
}

std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageFailure("cannot open config file " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw UsageFailure("malformed config file " + path + ": " + e.what());
  }
  std::vector<std::string> tokens;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "all")) {
      throw UsageFailure("config section '" + item.parents[0] + "' is not supported");
    }
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config") throw UsageFailure("config files cannot include other config files");
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) {
      if (i) value += ',';
      value += item.inputs[i];
    }
    tokens.push_back(item.inputs.empty() ? "--" + name : "--" + name + "=" + value);
  }
  return tokens;
}

// Position of the subcommand token, skipping global options.
std::optional<std::size_t> subcommand_index(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--threads") {
      ++i;
      continue;
    }
    if (args[i].starts_with("-")) continue;
    return i;
  }
  return std::nullopt;
}

template <typename T>
CLI::Option* add_archive(CLI::App* cmd, T& target) {
  return cmd->add_option("--archive", target, "Archive directory")->check(CLI::ExistingDirectory);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.empty()) args.emplace_back("asc-lens");

  CLI::App app{"Analyse how an encoder represents argument structure constructions", "asc-lens"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0 = all cores); never changes results");

  // dataset generate|validate
  auto* dataset = app.add_subcommand("dataset", "Generate or validate a construction sentence set");
  dataset->require_subcommand(1);
  auto* generate = dataset->add_subcommand("generate", "Generate a balanced sentence set");
  std::size_t per_class = 500;
  std::uint64_t dataset_seed = 0;
  std::string vocab_path, dataset_out;
  generate->add_option("--per-class", per_class, "Sentences per construction")->capture_default_str();
  generate->add_option("--seed", dataset_seed, "Generation seed")->capture_default_str();
  generate->add_option("--vocab", vocab_path, "Slot vocabulary JSON (default: built-in)")
      ->check(CLI::ExistingFile);
  generate->add_option("--out", dataset_out, "Output sentence-set JSON")->required();
  auto* validate = dataset->add_subcommand("validate", "Check balance, schemas and duplicates");
  std::string dataset_in;
  validate->add_option("--in", dataset_in, "Sentence-set JSON")->required()->check(CLI::ExistingFile);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic fixture archive");
  std::string fixture_config, synth_out;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--config", fixture_config, "Fixture spec JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--seed", synth_seed, "Override the spec's seed");
  synth->add_option("--out", synth_out, "Output archive directory")->required();

  AnalysisSettings s;
  std::string archive_dir, out_dir;

  auto* gdv_cmd = app.add_subcommand("gdv", "GDV per layer and role");
  add_archive(gdv_cmd, archive_dir)->required();
  gdv_cmd->add_option("--roles", s.roles, "Roles")->check(kRoleList)->capture_default_str();
  gdv_cmd->add_option("--layers", s.layers, "Layers")->check(kLayerSpec)->capture_default_str();
  gdv_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* project = app.add_subcommand("project", "MDS or t-SNE embedding of one role's activations");
  std::string method;
  std::string project_roles = "CLS";
  add_archive(project, archive_dir)->required();
  project->add_option("--method", method, "Projection method")
      ->required()
      ->check(CLI::IsMember({"mds", "tsne"}));
  project->add_option("--roles", project_roles, "Roles")->check(kRoleList)->capture_default_str();
  project->add_option("--layers", s.projection_layers, "Layers")->check(kLayerSpec)->capture_default_str();
  project->add_option("--perplexity", s.perplexity, "t-SNE perplexity")->capture_default_str();
  project->add_option("--iterations", s.iterations, "t-SNE iterations")->capture_default_str();
  project->add_option("--seed", s.seed, "t-SNE seed")->capture_default_str();
  project->add_option("--out", out_dir, "Output directory")->required();

  auto* probe = app.add_subcommand("probe", "Cross-validated linear probes per layer and role");
  add_archive(probe, archive_dir)->required();
  probe->add_option("--roles", s.roles, "Roles")->check(kRoleList)->capture_default_str();
  probe->add_option("--layers", s.layers, "Layers")->check(kLayerSpec)->capture_default_str();
  probe->add_option("--folds", s.folds, "Cross-validation folds")->capture_default_str();
  probe->add_option("--seed", s.seed, "Fold and training seed")->capture_default_str();
  probe->add_option("--lambda", s.lambda, "L2 regularisation strength")->capture_default_str();
  probe->add_option("--epochs", s.epochs, "Training epochs")->capture_default_str();
  probe->add_option("--out", out_dir, "Output directory")->required();

  auto* attention = app.add_subcommand("attention", "ANOVA F and FDR of attention mass per head");
  add_archive(attention, archive_dir)->required();
  attention->add_option("--roles", s.attention_roles, "Roles")->check(kRoleList)->capture_default_str();
  attention->add_flag("--include-self", s.include_self, "Count the token's attention to itself");
  attention->add_option("--variance", s.variance, "FDR variance estimator")
      ->check(CLI::IsMember({"population", "sample"}))
      ->capture_default_str();
  attention->add_option("--out", out_dir, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Render SVG figures from analysis CSVs");
  std::string report_in, report_out;
  report->add_option("--in", report_in, "Directory holding the CSVs")->required();
  report->add_option("--out", report_out, "Output directory (default: --in)");

  auto* all = app.add_subcommand("all", "Run gdv, project, probe, attention and report in one go");
  all->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path, fixture_path;
  all->add_option("--config", config_path, "TOML-like run config; flags override its entries");
  auto* all_archive = add_archive(all, archive_dir);
  auto* all_fixture = all->add_option("--fixture", fixture_path, "Synthesize the archive from a fixture spec")
                          ->check(CLI::ExistingFile);
  all_archive->excludes(all_fixture);
  all->add_option("--out", out_dir, "Output directory")->required();
  all->add_option("--roles", s.roles, "Roles for gdv and probe")->check(kRoleList)->capture_default_str();
  all->add_option("--layers", s.layers, "Layers for gdv and probe")->check(kLayerSpec)->capture_default_str();
  all->add_option("--projection", s.projection, "Projection methods")->check(kMethodList)->capture_default_str();
  all->add_option("--projection-roles", s.projection_roles, "Roles to project")
      ->check(kRoleList)
      ->capture_default_str();
  all->add_option("--projection-layers", s.projection_layers, "Layers to project")
      ->check(kLayerSpec)
      ->capture_default_str();
  all->add_option("--perplexity", s.perplexity, "t-SNE perplexity")->capture_default_str();
  all->add_option("--iterations", s.iterations, "t-SNE iterations")->capture_default_str();
  all->add_option("--seed", s.seed, "Master seed")->capture_default_str();
  all->add_option("--folds", s.folds, "Cross-validation folds")->capture_default_str();
  all->add_option("--lambda", s.lambda, "L2 regularisation strength")->capture_default_str();
  all->add_option("--epochs", s.epochs, "Training epochs")->capture_default_str();
  all->add_option("--attention-roles", s.attention_roles, "Roles for the attention analysis")
      ->check(kRoleList)
      ->capture_default_str();
  all->add_flag("--include-self", s.include_self, "Count the token's attention to itself");
  all->add_option("--variance", s.variance, "FDR variance estimator")
      ->check(CLI::IsMember({"population", "sample"}))
      ->capture_default_str();

  app.failure_message(CLI::FailureMessage::help);

  try {
    if (const auto sub = subcommand_index(args); sub && args[*sub] == "all") {
      if (const auto path = find_config_path(args, *sub + 1)) {
        const auto tokens = config_tokens(*path);
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(*sub) + 1, tokens.begin(), tokens.end());
      }
    }
    std::vector<const char*> raw;
    for (const auto& a : args) raw.push_back(a.c_str());
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageFailure& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  set_thread_limit(threads);

  try {
    if (generate->parsed()) {
      const SlotVocabulary vocab =
          vocab_path.empty() ? default_vocabulary() : vocabulary_from_json(read_text(vocab_path));
      for (const auto& warning : lint_vocabulary(vocab)) err << "warning: " << warning << "\n";
      const SentenceSet set = generate_dataset(vocab, per_class, dataset_seed);
      const ValidationReport check = validate_dataset(set);
      write_sentence_set(set, dataset_out);
      out << "wrote " << dataset_out << " (" << set.sentences.size() << " sentences)\n";
      if (!check.pass) throw ValidationFailure(check.summary());
    } else if (validate->parsed()) {
      const ValidationReport check = validate_dataset(read_sentence_set(dataset_in));
      out << check.summary();
      if (!check.pass) throw ValidationFailure("sentence set failed validation");
    } else if (synth->parsed()) {
      FixtureSpec spec = fixture_spec_from_json(read_text(fixture_config));
      if (synth_seed) spec.seed = *synth_seed;
      const ActivationArchive archive = synth_archive(spec);
      const ArchiveValidation check = validate_archive(archive);
      write_archive(archive, synth_out);
      out << "wrote " << synth_out << " (" << archive.n_sentences() << " sentences, " << archive.n_layers()
          << " layers)\n";
      if (!check.ok()) throw ValidationFailure("synthetic archive failed validation");
    } else if (gdv_cmd->parsed()) {
      stage_gdv(read_archive(archive_dir), s.roles, s.layers, out_dir, out);
    } else if (project->parsed()) {
      TsneParams params;
      params.perplexity = s.perplexity;
      params.iterations = s.iterations;
      params.seed = s.seed;
      stage_project(read_archive(archive_dir), method == "mds" ? ProjectionMethod::mds : ProjectionMethod::tsne,
                    project_roles, s.projection_layers, params, out_dir, out);
    } else if (probe->parsed()) {
      ProbeOptions options;
      options.folds = s.folds;
      options.seed = s.seed;
      options.lambda = s.lambda;
      options.epochs = s.epochs;
      stage_probe(read_archive(archive_dir), s.roles, s.layers, options, out_dir, out);
    } else if (attention->parsed()) {
      AttentionOptions options;
      options.include_self = s.include_self;
      options.variance = s.variance == "sample" ? VarianceMode::sample : VarianceMode::population;
      stage_attention(read_archive(archive_dir), s.attention_roles, options, out_dir, out);
    } else if (report->parsed()) {
      const fs::path target = report_out.empty() ? fs::path(report_in) : fs::path(report_out);
      if (stage_report(report_in, target, out) == 0) {
        throw ValidationFailure("no analysis CSVs found in " + report_in);
      }
    } else if (all->parsed()) {
      if (archive_dir.empty() && fixture_path.empty()) {
        err << "usage error: all needs --archive or --fixture\n" << all->help();
        return kExitUsage;
      }
      std::optional<FixtureSpec> spec;
      if (!fixture_path.empty()) spec = fixture_spec_from_json(read_text(fixture_path));
      const ActivationArchive archive = spec ? synth_archive(*spec) : read_archive(archive_dir);
      const fs::path dir = out_dir;

      const std::uint64_t tsne_seed = derive_seed(s.seed, 1);
      const std::uint64_t probe_seed = derive_seed(s.seed, 2);

      stage_gdv(archive, s.roles, s.layers, dir, out);
      TsneParams params;
      params.perplexity = s.perplexity;
      params.iterations = s.iterations;
      params.seed = tsne_seed;
      for (ProjectionMethod m : parse_methods(s.projection)) {
        stage_project(archive, m, s.projection_roles, s.projection_layers, params, dir, out);
      }
      ProbeOptions probe_options;
      probe_options.folds = s.folds;
      probe_options.seed = probe_seed;
      probe_options.lambda = s.lambda;
      probe_options.epochs = s.epochs;
      stage_probe(archive, s.roles, s.layers, probe_options, dir, out);
      AttentionOptions attention_options;
      attention_options.include_self = s.include_self;
      attention_options.variance = s.variance == "sample" ? VarianceMode::sample : VarianceMode::population;
      stage_attention(archive, s.attention_roles, attention_options, dir, out);
      stage_report(dir, dir, out);

      const ArchiveManifest& m = archive.manifest();
      json run;
      run["tool"] = "asc-lens";
      run["version"] = std::string(tool_version());
      run["timestamp"] = utc_timestamp();
      json config;
      if (!config_path.empty()) config["config_file"] = config_path;
      if (!archive_dir.empty()) config["archive"] = archive_dir;
      if (!fixture_path.empty()) config["fixture"] = fixture_path;
      config["out"] = out_dir;
      config["roles"] = s.roles;
      config["layers"] = s.layers;
      config["projection"] = s.projection;
      config["projection_roles"] = s.projection_roles;
      config["projection_layers"] = s.projection_layers;
      config["perplexity"] = s.perplexity;
      config["iterations"] = s.iterations;
      config["seed"] = s.seed;
      config["folds"] = s.folds;
      config["lambda"] = s.lambda;
      config["epochs"] = s.epochs;
      config["attention_roles"] = s.attention_roles;
      config["include_self"] = s.include_self;
      config["variance"] = s.variance;
      run["config"] = config;
      run["seeds"] = {{"master", s.seed}, {"tsne", tsne_seed}, {"probe", probe_seed}};
      run["archive"] = {{"model_id", m.model_id},       {"n_layers", m.n_layers},
                        {"hidden_size", m.hidden_size}, {"n_heads", m.n_heads},
                        {"max_tokens", m.max_tokens},   {"n_sentences", m.n_sentences}};
      if (spec) run["fixture_spec"] = json::parse(fixture_spec_to_json(*spec));
      write_text(dir / "run.json", run.dump(2) + "\n");
      out << "wrote " << (dir / "run.json").string() << "\n";
    }
  } catch (const ValidationFailure& e) {
    err << "validation failed: " << e.what() << "\n";
    return kExitFailure;
  } catch (const UsageFailure& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace asclens::cli
