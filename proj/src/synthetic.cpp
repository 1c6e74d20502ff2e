#include "msbop/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "msbop/error.hpp"
#include "msbop/random.hpp"

namespace msbop {

ArchetypeSet default_archetypes() {
  ArchetypeSet set;
  set["still"] = ArchetypeSpec{};
  {
    ArchetypeSpec s;
    s.amplitude = {0.8, 0.2, 0.5};
    s.frequency_hz = 2.0;
    s.noise_sigma = 0.05;
    set["periodic"] = s;
  }
  {
    ArchetypeSpec s;
    s.spike_rate = 0.08;
    s.spike_amplitude = 1.5;
    s.noise_sigma = 0.05;
    set["impulsive"] = s;
  }
  {
    ArchetypeSpec s;
    s.offset = {0.7, 0.0, 0.7};
    s.noise_sigma = 0.05;
    set["tilted"] = s;
  }
  {
    ArchetypeSpec s;
    s.offset = {0.0, 0.3, 0.9};
    s.amplitude = {0.4, 0.4, 0.1};
    s.frequency_hz = 0.5;
    s.noise_sigma = 0.05;
    set["swaying"] = s;
  }
  return set;
}

Signal generate_pure_signal(const std::string& name, const ArchetypeSpec& spec, std::size_t n,
                            std::uint64_t seed, double sample_rate_hz) {
  if (n == 0) throw ConfigError("signal length must be at least 1");
  const std::size_t axes = spec.num_axes();
  if (axes == 0 || spec.amplitude.size() != axes)
    throw ConfigError("archetype '" + name + "': offset and amplitude must have one entry per axis");
  if (spec.spike_rate < 0.0 || spec.spike_rate > 1.0 || spec.noise_sigma < 0.0)
    throw ConfigError("archetype '" + name + "': rates and noise must be non-negative");

  Rng rng(seed);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<std::vector<double>> data(axes, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const double wave =
        std::sin(2.0 * std::numbers::pi * spec.frequency_hz * static_cast<double>(t) / sample_rate_hz +
                 phase);
    // fixed draw order: spike decision, spike axis, spike sign, then noise per axis
    const bool spike = spec.spike_rate > 0.0 && rng.uniform() < spec.spike_rate;
    const std::size_t spike_axis = spike ? rng.index(axes) : axes;
    const double spike_value = spike ? (rng.uniform() < 0.5 ? -1.0 : 1.0) * spec.spike_amplitude : 0.0;
    for (std::size_t a = 0; a < axes; ++a) {
      double v = spec.offset[a] + spec.amplitude[a] * wave + spec.noise_sigma * rng.normal();
      if (a == spike_axis) v += spike_value;
      data[a][t] = v;
    }
  }
  return Signal(name + "_" + std::to_string(seed), std::move(data), sample_rate_hz, name,
                MixtureProportions{{name, 1.0}});
}

Signal generate_pure_signal(const std::string& name, std::size_t n, std::uint64_t seed,
                            const ArchetypeSet& archetypes, double sample_rate_hz) {
  const auto it = archetypes.find(name);
  if (it == archetypes.end()) throw ConfigError("unknown archetype '" + name + "'");
  return generate_pure_signal(name, it->second, n, seed, sample_rate_hz);
}

Signal concatenate_mixture(const std::vector<Signal>& parts, const std::string& id) {
  if (parts.empty()) throw ConfigError("mixture needs at least one part");
  const Signal& first = parts.front();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.num_axes() != first.num_axes())
      throw DataError("composition error: parts have different axis counts");
    if (p.sample_rate_hz() != first.sample_rate_hz())
      throw DataError("composition error: parts have different sample rates");
    if (!p.true_mix() && !p.label())
      throw DataError("composition error: part '" + p.id() + "' carries no label");
    total += p.length();
  }

  std::vector<std::vector<double>> axes(first.num_axes());
  for (auto& a : axes) a.reserve(total);
  MixtureProportions mix;
  std::vector<std::string> order;  // label order of first appearance
  for (const auto& p : parts) {
    for (std::size_t a = 0; a < axes.size(); ++a)
      axes[a].insert(axes[a].end(), p.axis(a).begin(), p.axis(a).end());
    const double weight = static_cast<double>(p.length()) / static_cast<double>(total);
    const MixtureProportions own = p.true_mix() ? *p.true_mix() : MixtureProportions{{*p.label(), 1.0}};
    for (const auto& [label, share] : own) {
      if (!mix.count(label)) order.push_back(label);
      mix[label] += weight * share;
    }
  }

  std::string label = order.front();
  for (const auto& l : order)
    if (mix[l] > mix[label]) label = l;

  // renormalize against accumulated rounding so the Signal invariant holds
  double sum = 0.0;
  for (const auto& [l, share] : mix) sum += share;
  for (auto& [l, share] : mix) share /= sum;

  return Signal(id, std::move(axes), first.sample_rate_hz(), label, std::move(mix),
                first.sensor_kind());
}

std::vector<Signal> generate_dataset(const SynthConfig& config, std::uint64_t seed) {
  for (const auto& name : config.use)
    if (!config.archetypes.count(name)) throw ConfigError("unknown archetype '" + name + "'");
  if (config.use.empty()) throw ConfigError("no archetypes selected");
  if (config.mixtures > 0 && config.use.size() < 2)
    throw ConfigError("mixtures need at least two archetypes");
  if (config.mixtures > 0 && config.length < 2)
    throw ConfigError("mixtures need a length of at least 2");
  if (config.mixtures > 0 && config.mixture_shares.empty())
    throw ConfigError("mixture_shares must not be empty");
  for (double w : config.mixture_shares)
    if (!(w > 0.0 && w < 1.0)) throw ConfigError("mixture shares must lie in (0, 1)");

  auto numbered = [](const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
    return std::string(buf);
  };

  std::vector<Signal> out;
  std::uint64_t stream = 0;
  for (const auto& name : config.use) {
    for (std::size_t i = 0; i < config.pures_per_archetype; ++i) {
      Signal s = generate_pure_signal(name, config.length, derive_seed(seed, stream++),
                                      config.archetypes, config.sample_rate_hz);
      out.emplace_back(numbered(("pure_" + name + "_").c_str(), i), s.axes(), s.sample_rate_hz(),
                       s.label(), s.true_mix(), s.sensor_kind());
    }
  }

  Rng pick(derive_seed(seed, 0xfeedULL));
  const std::size_t n_arch = config.use.size();
  for (std::size_t j = 0; j < config.mixtures; ++j) {
    const std::size_t a = pick.index(n_arch);
    std::size_t b = pick.index(n_arch - 1);
    if (b >= a) ++b;
    const double share = config.mixture_shares[j % config.mixture_shares.size()];
    std::size_t len_a = static_cast<std::size_t>(std::lround(share * static_cast<double>(config.length)));
    len_a = std::clamp<std::size_t>(len_a, 1, config.length - 1);
    const std::size_t len_b = config.length - len_a;
    std::vector<Signal> parts;
    parts.push_back(generate_pure_signal(config.use[a], len_a, derive_seed(seed, stream++),
                                         config.archetypes, config.sample_rate_hz));
    parts.push_back(generate_pure_signal(config.use[b], len_b, derive_seed(seed, stream++),
                                         config.archetypes, config.sample_rate_hz));
    out.push_back(concatenate_mixture(parts, numbered("mix_", j)));
  }
  return out;
}

}  // namespace msbop
