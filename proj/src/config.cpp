#include "subdelay/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "subdelay/studies.hpp"

namespace subdelay {

namespace {

using nlohmann::json;

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

const std::map<std::string, StudyKind>& kind_names() {
  static const std::map<std::string, StudyKind> names = {
      {"solve", StudyKind::solve},
      {"study-time", StudyKind::study_time},
      {"study-space", StudyKind::study_space},
      {"study-delay-nodes", StudyKind::study_delay_nodes},
      {"check-kernel", StudyKind::check_kernel},
      {"check-truncation", StudyKind::check_truncation},
  };
  return names;
}

struct KeyRules {
  std::set<std::string> required;
  std::set<std::string> optional;
};

const KeyRules& rules_for(StudyKind kind) {
  static const std::set<std::string> common = {"kind", "output", "format"};
  static const std::map<StudyKind, KeyRules> rules = [] {
    std::map<StudyKind, KeyRules> r;
    r[StudyKind::solve] = {{"alpha", "N", "M"},
                           {"p", "a_spec", "a_scale", "b", "tau", "K", "problem"}};
    r[StudyKind::study_time] = {{"alpha", "h", "N"},
                                {"p", "a_spec", "a_scale", "b", "tau", "K"}};
    r[StudyKind::study_delay_nodes] = {{"alpha", "h", "N"},
                                       {"p", "a_spec", "a_scale", "b", "tau", "K"}};
    r[StudyKind::study_space] = {{"alpha", "M"},
                                 {"N", "p", "a_spec", "a_scale", "b", "tau", "K"}};
    r[StudyKind::check_kernel] = {{"alpha", "N"}, {"tau"}};
    r[StudyKind::check_truncation] = {{"alpha", "N"}, {}};
    for (auto& [kind_, rule] : r)
      rule.optional.insert(common.begin(), common.end());
    return r;
  }();
  return rules.at(kind);
}

double require_number(const json& doc, const std::string& text,
                      const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number())
    throw ConfigError(line_of_key(text, key), "'" + key + "' must be a number");
  return v.get<double>();
}

int require_int(const json& v, const std::string& text, const std::string& key) {
  if (!v.is_number_integer())
    throw ConfigError(line_of_key(text, key), "'" + key + "' must be an integer");
  return v.get<int>();
}

// Accepts a single integer or an increasing list; sweeps additionally demand
// doubling so the log2 rate column is meaningful.
std::vector<int> parse_resolutions(const json& doc, const std::string& text,
                                   const std::string& key, bool list_allowed,
                                   bool require_doubling, int minimum) {
  const auto& v = doc.at(key);
  std::vector<int> values;
  if (v.is_array()) {
    if (!list_allowed && v.size() > 1)
      throw ConfigError(line_of_key(text, key),
                        "'" + key + "' must be a single integer for this kind");
    for (const auto& item : v) values.push_back(require_int(item, text, key));
  } else {
    values.push_back(require_int(v, text, key));
  }
  if (values.empty())
    throw ConfigError(line_of_key(text, key), "'" + key + "' must not be empty");
  for (int value : values)
    if (value < minimum)
      throw ConfigError(line_of_key(text, key),
                        "'" + key + "' entries must be >= " + std::to_string(minimum));
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i + 1] <= values[i])
      throw ConfigError(line_of_key(text, key),
                        "'" + key + "' must be strictly increasing");
    if (require_doubling && values[i + 1] != 2 * values[i])
      throw ConfigError(line_of_key(text, key),
                        "'" + key + "' must double between consecutive entries");
  }
  return values;
}

}  // namespace

std::string to_string(StudyKind kind) {
  for (const auto& [name, value] : kind_names())
    if (value == kind) return name;
  return "?";
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "json";
}

StudyConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(line_of_offset(text, e.byte), "not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ConfigError(1, "configuration must be a JSON object");

  if (!doc.contains("kind"))
    throw ConfigError(1, "missing required field 'kind'");
  if (!doc["kind"].is_string())
    throw ConfigError(line_of_key(text, "kind"), "'kind' must be a string");
  const std::string kind_name = doc["kind"].get<std::string>();
  const auto kind_it = kind_names().find(kind_name);
  if (kind_it == kind_names().end())
    throw ConfigError(line_of_key(text, "kind"), "unknown kind '" + kind_name + "'");

  StudyConfig config;
  config.kind = kind_it->second;
  const KeyRules& rules = rules_for(config.kind);

  for (const auto& [key, value] : doc.items()) {
    if (!rules.required.contains(key) && !rules.optional.contains(key))
      throw ConfigError(line_of_key(text, key),
                        "unknown key '" + key + "' for kind '" + kind_name + "'");
  }
  for (const auto& key : rules.required) {
    if (!doc.contains(key))
      throw ConfigError(1, "missing required field '" + key + "' for kind '" +
                               kind_name + "'");
  }

  config.alpha = require_number(doc, text, "alpha");
  if (!(config.alpha > 0.0) || !(config.alpha < 1.0))
    throw ConfigError(line_of_key(text, "alpha"),
                      "alpha must lie strictly in (0,1)");

  config.p = doc.contains("p") ? require_number(doc, text, "p")
                               : default_diffusivity(config.alpha);
  if (!(config.p > 0.0))
    throw ConfigError(line_of_key(text, "p"), "p must be positive");

  if (doc.contains("a_spec")) {
    if (!doc["a_spec"].is_string() || doc["a_spec"].get<std::string>() != "linear-scaled")
      throw ConfigError(line_of_key(text, "a_spec"),
                        "a_spec supports only 'linear-scaled'");
  }
  config.a_scale = doc.contains("a_scale") ? require_number(doc, text, "a_scale")
                                           : config.p;
  if (config.a_scale < 0.0)
    throw ConfigError(line_of_key(text, "a_scale"),
                      "a_scale must be nonnegative so that a(x) <= 0");

  config.b = doc.contains("b") ? require_number(doc, text, "b") : -1.0;
  config.tau = doc.contains("tau") ? require_number(doc, text, "tau") : 1.0;
  if (!(config.tau > 0.0))
    throw ConfigError(line_of_key(text, "tau"), "tau must be positive");
  config.K = doc.contains("K") ? require_int(doc["K"], text, "K") : 3;
  if (config.K < 1)
    throw ConfigError(line_of_key(text, "K"), "K must be at least 1");

  if (doc.contains("problem")) {
    config.problem = doc["problem"].get<std::string>();
    if (config.problem != "manufactured" && config.problem != "zero")
      throw ConfigError(line_of_key(text, "problem"),
                        "problem must be 'manufactured' or 'zero'");
  }

  // The benchmark solution exists only for b = -1, tau = 1, K = 3.
  const bool manufactured_run =
      config.kind != StudyKind::check_kernel &&
      config.kind != StudyKind::check_truncation &&
      !(config.kind == StudyKind::solve && config.problem == "zero");
  if (manufactured_run && (config.b != -1.0 || config.tau != 1.0 || config.K != 3))
    throw ConfigError(line_of_key(text, config.b != -1.0   ? "b"
                                        : config.tau != 1.0 ? "tau"
                                                            : "K"),
                      "the manufactured problem requires b = -1, tau = 1, K = 3");

  switch (config.kind) {
    case StudyKind::solve:
      config.N_list = parse_resolutions(doc, text, "N", false, false, 1);
      config.M_list = parse_resolutions(doc, text, "M", false, false, 2);
      break;
    case StudyKind::study_time:
    case StudyKind::study_delay_nodes:
      config.N_list = parse_resolutions(doc, text, "N", true, true, 1);
      config.h = require_number(doc, text, "h");
      if (!(config.h > 0.0) || config.h > 0.5)
        throw ConfigError(line_of_key(text, "h"), "h must lie in (0, 1/2]");
      break;
    case StudyKind::study_space:
      config.M_list = parse_resolutions(doc, text, "M", true, true, 2);
      config.N_list = doc.contains("N")
                          ? parse_resolutions(doc, text, "N", false, false, 1)
                          : std::vector<int>{10000};
      break;
    case StudyKind::check_kernel:
    case StudyKind::check_truncation:
      config.N_list = parse_resolutions(doc, text, "N", false, false, 1);
      break;
  }

  if (doc.contains("output")) {
    if (!doc["output"].is_string())
      throw ConfigError(line_of_key(text, "output"), "'output' must be a string");
    config.output = doc["output"].get<std::string>();
  }
  if (doc.contains("format")) {
    const std::string fmt = doc["format"].is_string() ? doc["format"].get<std::string>() : "";
    if (fmt == "csv")
      config.format = OutputFormat::csv;
    else if (fmt == "json")
      config.format = OutputFormat::json;
    else
      throw ConfigError(line_of_key(text, "format"), "format must be 'csv' or 'json'");
  }
  return config;
}

nlohmann::json emit_config(const StudyConfig& config) {
  json doc;
  doc["kind"] = to_string(config.kind);
  doc["alpha"] = config.alpha;
  const KeyRules& rules = rules_for(config.kind);
  auto allowed = [&rules](const char* key) {
    return rules.required.contains(key) || rules.optional.contains(key);
  };
  if (allowed("p")) doc["p"] = config.p;
  if (allowed("a_spec")) doc["a_spec"] = "linear-scaled";
  if (allowed("a_scale")) doc["a_scale"] = config.a_scale;
  if (allowed("b")) doc["b"] = config.b;
  if (allowed("tau")) doc["tau"] = config.tau;
  if (allowed("K")) doc["K"] = config.K;
  if (allowed("h")) doc["h"] = config.h;
  if (allowed("problem")) doc["problem"] = config.problem;
  if (allowed("N")) doc["N"] = config.N_list;
  if (allowed("M")) doc["M"] = config.M_list;
  doc["output"] = config.output;
  doc["format"] = to_string(config.format);
  return doc;
}

namespace {

std::string format_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

struct Output {
  std::string csv;
  json rows;
  json summary;
  std::string summary_line;
};

Output render_table(const ConvergenceTable& table) {
  Output out;
  out.csv = to_csv(table);
  json jt = to_json(table);
  out.rows = jt["rows"];
  double max_error = 0.0;
  for (const auto& row : table.rows)
    for (double e : row.E) max_error = std::max(max_error, e);
  const auto& last = table.rows.back();
  const double final_rate = last.rate.back();
  out.summary = {{"kind", table.kind},
                 {"alpha", table.alpha},
                 {"intervals", table.intervals},
                 {"max_error", max_error},
                 {"final_rate", std::isnan(final_rate) ? json(nullptr) : json(final_rate)}};
  char line[128];
  if (std::isnan(final_rate))
    std::snprintf(line, sizeof line, "max error %.4e", max_error);
  else
    std::snprintf(line, sizeof line, "max error %.4e, final rate %.3f",
                  max_error, final_rate);
  out.summary_line = line;
  return out;
}

Output run_solve(const StudyConfig& config) {
  const FractionalOrder alpha(config.alpha);
  const int N = config.N_list.at(0);
  const int M = config.M_list.at(0);
  const double scale = config.a_scale;

  ProblemSpec problem{alpha};
  std::function<double(double, double)> exact;
  if (config.problem == "zero") {
    problem.p = config.p;
    problem.a = [scale](double x) { return -scale * x; };
    problem.b = config.b;
    problem.tau = config.tau;
    problem.K = config.K;
    problem.L = 1.0;
    problem.phi = [](double, double) { return 0.0; };
    problem.f = [](double, double) { return 0.0; };
    exact = [](double, double) { return 0.0; };
  } else {
    ManufacturedCase mc = manufactured_case(
        alpha, config.p, [scale](double x) { return -scale * x; });
    problem = mc.problem;
    exact = mc.exact;
  }

  const TimeGrid grid(problem.tau, N, problem.K);
  const SpatialMesh mesh = build_mesh(problem.L, M);
  const Trajectory traj = run(problem, mesh, grid);

  Output out;
  out.csv = "n,t,l2_error,l2_norm\n";
  out.rows = json::array();
  double max_error = 0.0;
  for (int n = 0; n <= grid.total_steps(); ++n) {
    const double t = grid.time(n);
    const FemVector frame(traj.frame(n).begin(), traj.frame(n).end());
    const double err = l2_error(frame, [&](double x) { return exact(x, t); }, mesh);
    const double norm = l2_error(frame, [](double) { return 0.0; }, mesh);
    max_error = std::max(max_error, err);
    out.csv += std::to_string(n) + "," + format_cell(t) + "," + format_cell(err) +
               "," + format_cell(norm) + "\n";
    out.rows.push_back({{"n", n}, {"t", t}, {"l2_error", err}, {"l2_norm", norm}});
  }
  out.summary = {{"max_error", max_error}, {"final_rate", nullptr}};
  out.summary_line = "max error " + format_cell(max_error);
  return out;
}

Output run_check_kernel(const StudyConfig& config) {
  const FractionalOrder alpha(config.alpha);
  const int length = config.N_list.at(0);
  const double rho = config.tau / length;
  const L1Weights w = l1_weights(alpha, rho, length + 1);
  const ComplementaryKernel kernel = complementary_kernel(w, length);

  const double gamma2a = gamma_eval(2.0 - config.alpha);
  const double inv_gamma1a = 1.0 / gamma_eval(1.0 + config.alpha);
  const double rho_a = std::pow(rho, config.alpha);

  Output out;
  out.csv = "l,P,identity_residual,bound_decay,prefix_sum,bound_prefix\n";
  out.rows = json::array();
  double max_residual = 0.0;
  int decay_violations = 0;
  int prefix_violations = 0;
  double prefix = 0.0;
  for (int l = 0; l < length; ++l) {
    double s = 0.0;
    for (int m = 0; m <= l; ++m) s += kernel.P[l - m] * w.a[m];
    const double residual = std::abs(s - 1.0);
    max_residual = std::max(max_residual, residual);

    const double decay = gamma2a * rho_a * std::pow(l + 1.0, config.alpha - 1.0);
    // P_0 equals the decay envelope exactly; the strict form starts at l = 1.
    const bool decay_ok = l == 0 ? kernel.P[l] <= decay * (1.0 + 4e-16)
                                 : kernel.P[l] < decay;
    if (!decay_ok) ++decay_violations;

    prefix += kernel.P[l];
    const double bound_prefix = std::pow((l + 1) * rho, config.alpha) * inv_gamma1a;
    if (prefix > bound_prefix) ++prefix_violations;

    out.csv += std::to_string(l) + "," + format_cell(kernel.P[l]) + "," +
               format_cell(residual) + "," + format_cell(decay) + "," +
               format_cell(prefix) + "," + format_cell(bound_prefix) + "\n";
    out.rows.push_back({{"l", l},
                        {"P", kernel.P[l]},
                        {"identity_residual", residual},
                        {"bound_decay", decay},
                        {"prefix_sum", prefix},
                        {"bound_prefix", bound_prefix}});
  }
  out.summary = {{"max_identity_residual", max_residual},
                 {"decay_bound_violations", decay_violations},
                 {"prefix_bound_violations", prefix_violations}};
  char line[160];
  std::snprintf(line, sizeof line,
                "max identity residual %.4e, bound violations %d",
                max_residual, decay_violations + prefix_violations);
  out.summary_line = line;
  return out;
}

Output run_check_truncation(const StudyConfig& config) {
  const FractionalOrder alpha(config.alpha);
  const ManufacturedCase mc = manufactured_case(alpha);
  const TimeGrid grid(1.0, config.N_list.at(0), 3);
  const TruncationProfile profile = truncation_error_profile(mc, grid);

  Output out;
  out.csv = "n,t,residual,bound,ratio\n";
  out.rows = json::array();
  for (int n = 1; n <= grid.total_steps(); ++n) {
    const double r = profile.residual[n - 1];
    const double b = profile.bound[n - 1];
    out.csv += std::to_string(n) + "," + format_cell(grid.time(n)) + "," +
               format_cell(r) + "," + format_cell(b) + "," + format_cell(r / b) +
               "\n";
    out.rows.push_back(
        {{"n", n}, {"t", grid.time(n)}, {"residual", r}, {"bound", b}, {"ratio", r / b}});
  }
  out.summary = {{"fitted_constants", profile.fitted_constant},
                 {"slope_first_interval", profile.slope_first_interval}};
  const double cmax = *std::max_element(profile.fitted_constant.begin(),
                                        profile.fitted_constant.end());
  char line[160];
  std::snprintf(line, sizeof line,
                "max fitted constant %.4f, first-interval slope %.3f", cmax,
                profile.slope_first_interval);
  out.summary_line = line;
  return out;
}

}  // namespace

RunReport dispatch(const StudyConfig& config, const std::string& output_override,
                   std::optional<OutputFormat> format_override, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  const OutputFormat format = format_override.value_or(config.format);

  StudyOptions options;
  options.p = config.p;
  options.a_scale = config.a_scale;
  options.threads = threads;

  Output out;
  const FractionalOrder alpha(config.alpha);
  switch (config.kind) {
    case StudyKind::solve:
      out = run_solve(config);
      break;
    case StudyKind::study_time:
      out = render_table(temporal_study(alpha, config.h, config.N_list, options));
      break;
    case StudyKind::study_delay_nodes:
      out = render_table(delay_node_study(alpha, config.h, config.N_list, options));
      break;
    case StudyKind::study_space:
      out = render_table(
          spatial_study(alpha, config.N_list.at(0), config.M_list, options));
      break;
    case StudyKind::check_kernel:
      out = run_check_kernel(config);
      break;
    case StudyKind::check_truncation:
      out = run_check_truncation(config);
      break;
  }

  std::string path = !output_override.empty() ? output_override : config.output;
  if (path.empty())
    path = to_string(config.kind) + (format == OutputFormat::csv ? ".csv" : ".json");

  std::string payload;
  if (format == OutputFormat::csv) {
    payload = out.csv;
  } else {
    const json doc = {{"config", emit_config(config)},
                      {"rows", out.rows},
                      {"summary", out.summary}};
    payload = doc.dump(2) + "\n";
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  file << payload;
  if (!file.good()) throw std::runtime_error("failed writing output file: " + path);
  file.close();

  RunReport report;
  report.config_echo = emit_config(config);
  report.output_path = path;
  report.summary = out.summary_line;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace subdelay
