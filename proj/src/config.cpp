#include "airfed/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "airfed/errors.hpp"

namespace airfed {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw Error(Errc::invalid_config, key + ": '" + value + "' is not " + want);
}

double to_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value, "a number");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value, "a number");
  }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  if (value.empty() || value.front() == '-') bad_value(key, value, "a non-negative integer");
  try {
    std::size_t used = 0;
    const auto v = std::stoull(value, &used);
    if (used != value.size()) bad_value(key, value, "a non-negative integer");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value, "a non-negative integer");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

std::optional<double> to_auto_real(const std::string& key, const std::string& value) {
  if (value == "auto") return std::nullopt;
  return to_real(key, value);
}

std::vector<double> to_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_real(key, item));
  }
  return out;
}

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void set_key(ExperimentConfig& cfg, const std::string& dotted, const std::string& raw) {
  const std::string value = trim(raw);
  const std::string& k = dotted;
  if (k == "problem.devices") cfg.gen.n_devices = to_unsigned(k, value);
  else if (k == "problem.samples_per_device") cfg.gen.samples_per_device = to_unsigned(k, value);
  else if (k == "problem.dim") cfg.gen.dim = to_unsigned(k, value);
  else if (k == "problem.data_noise_var") cfg.gen.data_noise_var = to_real(k, value);
  else if (k == "problem.conditioning") {
    if (value == "well") cfg.gen.conditioning = Conditioning::well;
    else if (value == "ill") cfg.gen.conditioning = Conditioning::ill;
    else bad_value(k, value, "'well' or 'ill'");
  } else if (k == "problem.kappa") cfg.gen.kappa_target = to_real(k, value);
  else if (k == "channel.error_free") cfg.error_free = to_bool(k, value);
  else if (k == "channel.noise_var") cfg.chan.noise_var = to_real(k, value);
  else if (k == "channel.threshold") cfg.chan.threshold = to_real(k, value);
  else if (k == "channel.max_power") cfg.chan.max_power = to_real(k, value);
  else if (k == "channel.selection") cfg.chan.mode = parse_selection_mode(value);
  else if (k == "channel.b") cfg.chan.b = to_unsigned(k, value);
  else if (k == "algorithm.name") cfg.algo.kind = parse_algorithm(value);
  else if (k == "algorithm.step") cfg.algo.step = to_auto_real(k, value);
  else if (k == "algorithm.rate") cfg.algo.rate = to_auto_real(k, value);
  else if (k == "algorithm.local_steps") cfg.algo.local_steps = to_unsigned(k, value);
  else if (k == "run.rounds") cfg.rounds = to_unsigned(k, value);
  else if (k == "run.trials") cfg.trials = to_unsigned(k, value);
  else if (k == "run.seed") cfg.seed = to_unsigned(k, value);
  else if (k == "run.output_dir") cfg.output_dir = value;
  else if (k == "run.jobs") cfg.jobs = to_unsigned(k, value);
  else if (k == "run.dump_trials") cfg.dump_trials = to_bool(k, value);
  else if (k == "sweep.kappas") cfg.kappas = to_real_list(k, value);
  else throw Error(Errc::invalid_config, "unknown key '" + k + "'");
}

}  // namespace

ChannelModel ExperimentConfig::channel_model() const {
  if (error_free) return ErrorFree{};
  return chan;
}

void ExperimentConfig::validate() const {
  gen.validate();
  chan.validate(gen.n_devices);
  if (rounds < 1) throw Error(Errc::invalid_config, "run.rounds must be >= 1");
  if (trials < 1) throw Error(Errc::invalid_config, "run.trials must be >= 1");
  if (jobs < 1) throw Error(Errc::invalid_config, "run.jobs must be >= 1");
  if (algo.local_steps < 1) throw Error(Errc::invalid_config, "algorithm.local_steps must be >= 1");
  if (algo.step && !(*algo.step > 0.0)) throw Error(Errc::non_positive_step, "algorithm.step must be > 0");
  if (algo.rate && !(*algo.rate > 0.0)) throw Error(Errc::non_positive_step, "algorithm.rate must be > 0");
  for (double k : kappas) {
    if (!(k >= 1.0)) throw Error(Errc::invalid_kappa, "sweep.kappas entries must be >= 1");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  // '#' comment lines are accepted alongside the INI ';'
  std::stringstream cleaned;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t.front() == '#') continue;
    cleaned << line << '\n';
  }

  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Errc::invalid_config, std::string("malformed config: ") + e.what());
  }

  ExperimentConfig cfg;
  std::set<std::string> seen;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(Errc::invalid_config, "key '" + section + "' is outside any section");
    }
    for (const auto& [key, node] : body) {
      const std::string dotted = section + "." + key;
      set_key(cfg, dotted, node.get_value<std::string>());
      seen.insert(dotted);
    }
  }
  for (const char* required : {"channel.max_power", "run.rounds"}) {
    if (!seen.contains(required)) {
      throw Error(Errc::invalid_config, std::string("missing required key '") + required + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& dotted_key, const std::string& value) {
  set_key(cfg, dotted_key, value);
}

std::string render_config(const ExperimentConfig& cfg, bool include_runtime) {
  std::ostringstream out;
  out << "[problem]\n"
      << "devices = " << cfg.gen.n_devices << "\n"
      << "samples_per_device = " << cfg.gen.samples_per_device << "\n"
      << "dim = " << cfg.gen.dim << "\n"
      << "data_noise_var = " << fmt_real(cfg.gen.data_noise_var) << "\n"
      << "conditioning = " << (cfg.gen.conditioning == Conditioning::ill ? "ill" : "well") << "\n"
      << "kappa = " << fmt_real(cfg.gen.kappa_target) << "\n\n"
      << "[channel]\n"
      << "error_free = " << (cfg.error_free ? "true" : "false") << "\n"
      << "noise_var = " << fmt_real(cfg.chan.noise_var) << "\n"
      << "threshold = " << fmt_real(cfg.chan.threshold) << "\n"
      << "max_power = " << fmt_real(cfg.chan.max_power) << "\n"
      << "selection = " << to_string(cfg.chan.mode) << "\n"
      << "b = " << cfg.chan.b << "\n\n"
      << "[algorithm]\n"
      << "name = " << to_string(cfg.algo.kind) << "\n"
      << "step = " << (cfg.algo.step ? fmt_real(*cfg.algo.step) : "auto") << "\n"
      << "rate = " << (cfg.algo.rate ? fmt_real(*cfg.algo.rate) : "auto") << "\n"
      << "local_steps = " << cfg.algo.local_steps << "\n\n"
      << "[run]\n"
      << "rounds = " << cfg.rounds << "\n"
      << "trials = " << cfg.trials << "\n"
      << "seed = " << cfg.seed << "\n";
  if (include_runtime) {
    out << "output_dir = " << cfg.output_dir.string() << "\n"
        << "jobs = " << cfg.jobs << "\n";
  }
  out << "dump_trials = " << (cfg.dump_trials ? "true" : "false") << "\n";
  if (!cfg.kappas.empty()) {
    out << "\n[sweep]\nkappas = ";
    for (std::size_t i = 0; i < cfg.kappas.size(); ++i) {
      out << (i ? ", " : "") << fmt_real(cfg.kappas[i]);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace airfed
