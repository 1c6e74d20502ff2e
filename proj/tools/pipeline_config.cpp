#include "pipeline_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <functional>
#include <map>
#include <sstream>

#include "msbop/error.hpp"
#include "msbop/text.hpp"

namespace msbop::cli {

namespace {

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double as_real(const std::string& section, const std::string& key, const std::string& value) {
  const auto v = parse_real(value);
  if (!v) throw ConfigError(where(section, key) + ": '" + value + "' is not a number");
  return *v;
}

std::size_t as_count(const std::string& section, const std::string& key, const std::string& value) {
  const auto v = parse_integer(value);
  if (!v || *v < 0) throw ConfigError(where(section, key) + ": '" + value + "' is not a non-negative integer");
  return static_cast<std::size_t>(*v);
}

bool as_bool(const std::string& section, const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(where(section, key) + ": '" + value + "' is not a boolean");
}

std::vector<std::string> as_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& part : split(value, ',')) {
    const auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::vector<double> as_reals(const std::string& section, const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : as_list(value)) out.push_back(as_real(section, key, item));
  return out;
}

std::vector<std::size_t> as_counts(const std::string& section, const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : as_list(value)) out.push_back(as_count(section, key, item));
  return out;
}

template <class T>
std::string list_text(const std::vector<T>& values) {
  std::vector<std::string> parts;
  for (const auto& v : values) {
    if constexpr (std::is_same_v<T, double>) parts.push_back(format_real(v));
    else if constexpr (std::is_same_v<T, std::string>) parts.push_back(v);
    else parts.push_back(std::to_string(v));
  }
  return join(parts, ",");
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"general",
       {{"seed", [](PipelineConfig& c, const std::string& v) { c.seed = as_count("general", "seed", v); }}}},
      {"signal",
       {{"sample_rate_hz",
         [](PipelineConfig& c, const std::string& v) {
           c.schema.sample_rate_hz = as_real("signal", "sample_rate_hz", v);
           c.synth.sample_rate_hz = c.schema.sample_rate_hz;
         }},
        {"sensor_kind", [](PipelineConfig& c, const std::string& v) { c.schema.sensor_kind = v; }}}},
      {"synth",
       {{"archetypes", [](PipelineConfig& c, const std::string& v) { c.synth.use = as_list(v); }},
        {"length", [](PipelineConfig& c, const std::string& v) { c.synth.length = as_count("synth", "length", v); }},
        {"pures_per_archetype",
         [](PipelineConfig& c, const std::string& v) {
           c.synth.pures_per_archetype = as_count("synth", "pures_per_archetype", v);
         }},
        {"mixtures",
         [](PipelineConfig& c, const std::string& v) { c.synth.mixtures = as_count("synth", "mixtures", v); }},
        {"mixture_shares",
         [](PipelineConfig& c, const std::string& v) {
           c.synth.mixture_shares = as_reals("synth", "mixture_shares", v);
         }}}},
      {"codebook",
       {{"scales", [](PipelineConfig& c, const std::string& v) { c.codebook.scales = as_counts("codebook", "scales", v); }},
        {"sizes", [](PipelineConfig& c, const std::string& v) { c.codebook.sizes = as_counts("codebook", "sizes", v); }},
        {"sampling",
         [](PipelineConfig& c, const std::string& v) { c.codebook.sampling = as_real("codebook", "sampling", v); }},
        {"max_iter",
         [](PipelineConfig& c, const std::string& v) { c.codebook.kmeans.max_iter = as_count("codebook", "max_iter", v); }},
        {"tol", [](PipelineConfig& c, const std::string& v) { c.codebook.kmeans.tol = as_real("codebook", "tol", v); }}}},
      {"features",
       {{"normalize", [](PipelineConfig& c, const std::string& v) { c.normalize = as_bool("features", "normalize", v); }}}},
      {"fit",
       {{"k", [](PipelineConfig& c, const std::string& v) { c.k = as_count("fit", "k", v); }},
        {"tol", [](PipelineConfig& c, const std::string& v) { c.anls.tol = as_real("fit", "tol", v); }},
        {"max_iter", [](PipelineConfig& c, const std::string& v) { c.anls.max_iter = as_count("fit", "max_iter", v); }},
        {"restarts", [](PipelineConfig& c, const std::string& v) { c.anls.restarts = as_count("fit", "restarts", v); }},
        {"sample_fraction",
         [](PipelineConfig& c, const std::string& v) { c.sample_fraction = as_real("fit", "sample_fraction", v); }},
        {"inner_tol", [](PipelineConfig& c, const std::string& v) { c.anls.inner.tol = as_real("fit", "inner_tol", v); }},
        {"inner_max_iter",
         [](PipelineConfig& c, const std::string& v) { c.anls.inner.max_iter = as_count("fit", "inner_max_iter", v); }}}},
      {"gmm",
       {{"max_iter", [](PipelineConfig& c, const std::string& v) { c.gmm.max_iter = as_count("gmm", "max_iter", v); }},
        {"tol", [](PipelineConfig& c, const std::string& v) { c.gmm.tol = as_real("gmm", "tol", v); }}}},
      {"evaluate",
       {{"train_fraction",
         [](PipelineConfig& c, const std::string& v) { c.train_fraction = as_real("evaluate", "train_fraction", v); }}}},
      {"sweep",
       {{"methods", [](PipelineConfig& c, const std::string& v) { c.methods = as_list(v); }},
        {"k_values", [](PipelineConfig& c, const std::string& v) { c.k_values = as_counts("sweep", "k_values", v); }}}},
  };
  return table;
}

void set_archetype(ArchetypeSpec& spec, const std::string& section, const std::string& key, const std::string& v) {
  if (key == "offset") spec.offset = as_reals(section, key, v);
  else if (key == "amplitude") spec.amplitude = as_reals(section, key, v);
  else if (key == "frequency_hz") spec.frequency_hz = as_real(section, key, v);
  else if (key == "spike_rate") spec.spike_rate = as_real(section, key, v);
  else if (key == "spike_amplitude") spec.spike_amplitude = as_real(section, key, v);
  else if (key == "noise_sigma") spec.noise_sigma = as_real(section, key, v);
  else throw ConfigError(where(section, key) + ": unknown key");
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (c.codebook.scales.empty()) throw ConfigError("[codebook] scales must not be empty");
  if (c.codebook.scales.size() != c.codebook.sizes.size())
    throw ConfigError("[codebook] scales and sizes must have the same length");
  for (std::size_t i = 0; i < c.codebook.scales.size(); ++i) {
    if (c.codebook.scales[i] < 1 || c.codebook.sizes[i] < 1)
      throw ConfigError("[codebook] scales and sizes must be at least 1");
    if (i && c.codebook.scales[i] <= c.codebook.scales[i - 1])
      throw ConfigError("[codebook] scales must be strictly increasing");
  }
  auto fraction = [](double v, const char* what) {
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " must lie in (0, 1]");
  };
  if (c.codebook.sampling) fraction(*c.codebook.sampling, "[codebook] sampling");
  fraction(c.sample_fraction, "[fit] sample_fraction");
  fraction(c.train_fraction, "[evaluate] train_fraction");
  if (c.k < 1) throw ConfigError("[fit] k must be at least 1");
  if (c.anls.restarts < 1 || c.anls.max_iter < 1 || c.anls.inner.max_iter < 1)
    throw ConfigError("[fit] restarts and iteration limits must be at least 1");
  if (c.codebook.kmeans.max_iter < 1 || c.gmm.max_iter < 1)
    throw ConfigError("iteration limits must be at least 1");
  if (!(c.schema.sample_rate_hz > 0.0)) throw ConfigError("[signal] sample_rate_hz must be positive");
  if (c.synth.length < 1) throw ConfigError("[synth] length must be at least 1");
  for (const auto& name : c.synth.use)
    if (!c.synth.archetypes.count(name)) throw ConfigError("[synth] unknown archetype '" + name + "'");
  for (const auto& m : c.methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw ConfigError("[sweep] unknown method '" + m + "'");
  for (std::size_t k : c.k_values)
    if (k < 1) throw ConfigError("[sweep] k_values must be at least 1");
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig config;
  if (path.empty()) return config;

  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' outside of a section");
    if (section.rfind("archetype.", 0) == 0) {
      const std::string name = section.substr(10);
      if (name.empty()) throw ConfigError("config: archetype section without a name");
      ArchetypeSpec& spec = config.synth.archetypes[name];
      for (const auto& [key, value] : body) set_archetype(spec, section, key, value.data());
      continue;
    }
    const auto sec = table.find(section);
    if (sec == table.end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ConfigError(where(section, key) + ": unknown key");
      setter->second(config, std::string(trim(value.data())));
    }
  }
  validate(config);
  return config;
}

std::string canonical_text(const PipelineConfig& c) {
  std::ostringstream out;
  out << "general.seed=" << c.seed << '\n';
  out << "signal.sample_rate_hz=" << format_real(c.schema.sample_rate_hz) << '\n';
  out << "signal.sensor_kind=" << c.schema.sensor_kind << '\n';
  out << "synth.archetypes=" << list_text(c.synth.use) << '\n';
  out << "synth.length=" << c.synth.length << '\n';
  out << "synth.pures_per_archetype=" << c.synth.pures_per_archetype << '\n';
  out << "synth.mixtures=" << c.synth.mixtures << '\n';
  out << "synth.mixture_shares=" << list_text(c.synth.mixture_shares) << '\n';
  for (const auto& [name, a] : c.synth.archetypes) {
    const std::string p = "archetype." + name + ".";
    out << p << "offset=" << list_text(a.offset) << '\n';
    out << p << "amplitude=" << list_text(a.amplitude) << '\n';
    out << p << "frequency_hz=" << format_real(a.frequency_hz) << '\n';
    out << p << "spike_rate=" << format_real(a.spike_rate) << '\n';
    out << p << "spike_amplitude=" << format_real(a.spike_amplitude) << '\n';
    out << p << "noise_sigma=" << format_real(a.noise_sigma) << '\n';
  }
  out << "codebook.scales=" << list_text(c.codebook.scales) << '\n';
  out << "codebook.sizes=" << list_text(c.codebook.sizes) << '\n';
  out << "codebook.sampling=" << format_real(c.codebook.sampling.value_or(1.0)) << '\n';
  out << "codebook.max_iter=" << c.codebook.kmeans.max_iter << '\n';
  out << "codebook.tol=" << format_real(c.codebook.kmeans.tol) << '\n';
  out << "features.normalize=" << (c.normalize ? "true" : "false") << '\n';
  out << "fit.k=" << c.k << '\n';
  out << "fit.tol=" << format_real(c.anls.tol) << '\n';
  out << "fit.max_iter=" << c.anls.max_iter << '\n';
  out << "fit.restarts=" << c.anls.restarts << '\n';
  out << "fit.sample_fraction=" << format_real(c.sample_fraction) << '\n';
  out << "fit.inner_tol=" << format_real(c.anls.inner.tol) << '\n';
  out << "fit.inner_max_iter=" << c.anls.inner.max_iter << '\n';
  out << "gmm.max_iter=" << c.gmm.max_iter << '\n';
  out << "gmm.tol=" << format_real(c.gmm.tol) << '\n';
  out << "evaluate.train_fraction=" << format_real(c.train_fraction) << '\n';
  out << "sweep.methods=" << list_text(c.methods) << '\n';
  out << "sweep.k_values=" << list_text(c.k_values) << '\n';
  return out.str();
}

std::string config_hash(const PipelineConfig& config) { return hex64(fnv1a(canonical_text(config))); }

MethodOptions method_options(const PipelineConfig& config) {
  MethodOptions m;
  m.anls = config.anls;
  m.gmm = config.gmm;
  m.gmm.init = config.codebook.kmeans;
  m.kmeans = config.codebook.kmeans;
  return m;
}

}  // namespace msbop::cli
