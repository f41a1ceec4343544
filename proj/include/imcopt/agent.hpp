#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace imcopt {

// Minimal dense MLP with manual backprop and Adam, enough to host the
// actor-critic pair. Deterministic given the init RNG.
class Mlp {
 public:
  // `sigmoid_out` squashes the output layer into (0,1); otherwise linear.
  Mlp(std::vector<int> dims, bool sigmoid_out, double lr, std::mt19937& rng);

  std::vector<double> forward(const std::vector<double>& in) const;

  // Accumulates gradients for one sample given dLoss/dOut; returns dLoss/dIn.
  std::vector<double> backward(const std::vector<double>& in,
                               const std::vector<double>& dloss_dout);
  // dLoss/dIn only; leaves the gradient accumulators untouched.
  std::vector<double> backward_input_only(const std::vector<double>& in,
                                          const std::vector<double>& dloss_dout) const;
  void apply_grads(int batch_size);  // Adam step on accumulated grads, then zero

  int in_dim() const { return dims_.front(); }
  int out_dim() const { return dims_.back(); }

 private:
  struct Layer {
    std::vector<double> w, b;        // w is out x in, row-major
    std::vector<double> gw, gb;      // grad accumulators
    std::vector<double> mw, vw, mb, vb;  // Adam state
    int in = 0, out = 0;
  };
  std::vector<double> forward_cached(const std::vector<double>& in,
                                     std::vector<std::vector<double>>& acts) const;
  std::vector<int> dims_;
  std::vector<Layer> layers_;
  bool sigmoid_out_;
  double lr_;
  long step_ = 0;
};

struct Transition {
  std::vector<double> state;
  std::vector<double> action;  // in [0,1]^2
  double reward = 0.0;
};

struct AgentConfig {
  int state_dim = 8;
  int action_dim = 2;
  int hidden = 64;
  double actor_lr = 1e-3;
  double critic_lr = 1e-2;
  std::size_t replay_capacity = 4096;
  int batch_size = 64;
  int updates_per_episode = 10;
};

// DDPG-style actor-critic over per-layer states. The critic regresses the
// episode reward assigned to each of the episode's transitions; the actor
// follows the deterministic policy gradient through the critic.
class DdpgAgent {
 public:
  DdpgAgent(AgentConfig cfg, std::uint64_t seed);

  // Deterministic forward pass plus Gaussian exploration noise, clamped to [0,1].
  std::vector<double> act(const std::vector<double>& state, double noise_scale);

  void update(const std::vector<Transition>& episode);

  // Mean squared critic error on a batch; exposed for the fit smoke test.
  double critic_loss(const std::vector<Transition>& batch) const;
  void critic_fit_step(const std::vector<Transition>& batch);

 private:
  void train_batch(const std::vector<const Transition*>& batch);
  AgentConfig cfg_;
  std::mt19937 rng_;  // initialized before the networks it seeds
  Mlp actor_;
  Mlp critic_;
  std::vector<Transition> replay_;
  std::size_t replay_next_ = 0;
};

}  // namespace imcopt
