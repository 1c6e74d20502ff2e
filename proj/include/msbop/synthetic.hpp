#ifndef MSBOP_SYNTHETIC_HPP
#define MSBOP_SYNTHETIC_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msbop/signal.hpp"

namespace msbop {

// Parametric waveform for one behavioral archetype. Per axis a, sample t:
//   offset[a] + amplitude[a] * sin(2 pi f t / rate + phase) + spike + noise
// with phase drawn once per signal, spikes arriving independently per
// sample with probability spike_rate (random sign and axis), and Gaussian
// noise of standard deviation noise_sigma.
struct ArchetypeSpec {
  std::vector<double> offset{0.0, 0.0, 1.0};
  std::vector<double> amplitude{0.0, 0.0, 0.0};
  double frequency_hz = 0.0;
  double spike_rate = 0.0;
  double spike_amplitude = 0.0;
  double noise_sigma = 0.02;

  std::size_t num_axes() const { return offset.size(); }
};

using ArchetypeSet = std::map<std::string, ArchetypeSpec>;

// still, periodic, impulsive, tilted, swaying
ArchetypeSet default_archetypes();

// Deterministic in (spec, n, seed). The result is labelled `name` with
// true_mix {name: 1}.
Signal generate_pure_signal(const std::string& name, const ArchetypeSpec& spec, std::size_t n,
                            std::uint64_t seed, double sample_rate_hz = 10.0);

// Looks `name` up in `archetypes`; ConfigError if absent.
Signal generate_pure_signal(const std::string& name, std::size_t n, std::uint64_t seed,
                            const ArchetypeSet& archetypes = default_archetypes(),
                            double sample_rate_hz = 10.0);

// Concatenates parts in order. The mixture annotation is the length-weighted
// combination of the parts' own annotations (a labelled part without one
// counts as pure). The label is the one with the largest share, ties going
// to the earlier part.
Signal concatenate_mixture(const std::vector<Signal>& parts, const std::string& id);

struct SynthConfig {
  ArchetypeSet archetypes = default_archetypes();
  std::vector<std::string> use{"still", "periodic", "impulsive"};
  std::size_t length = 400;
  std::size_t pures_per_archetype = 100;
  std::size_t mixtures = 200;
  // Share of the first part in each two-part mixture, cycled in order.
  std::vector<double> mixture_shares{0.5, 0.25};
  double sample_rate_hz = 10.0;
};

// Pure signals (ids pure_<name>_<i>) followed by two-part mixtures of
// distinct archetypes (ids mix_<i>), all derived from `seed`.
std::vector<Signal> generate_dataset(const SynthConfig& config, std::uint64_t seed);

}  // namespace msbop

#endif
