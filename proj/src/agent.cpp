#include "imcopt/agent.hpp"

#include <algorithm>
#include <cmath>

#include "imcopt/error.hpp"

namespace imcopt {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Mlp::Mlp(std::vector<int> dims, bool sigmoid_out, double lr, std::mt19937& rng)
    : dims_(std::move(dims)), sigmoid_out_(sigmoid_out), lr_(lr) {
  layers_.resize(dims_.size() - 1);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Layer& l = layers_[i];
    l.in = dims_[i];
    l.out = dims_[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    l.w.resize(static_cast<std::size_t>(l.out) * l.in);
    l.b.assign(l.out, 0.0);
    for (auto& w : l.w) w = dist(rng);
    l.gw.assign(l.w.size(), 0.0);
    l.gb.assign(l.b.size(), 0.0);
    l.mw.assign(l.w.size(), 0.0);
    l.vw.assign(l.w.size(), 0.0);
    l.mb.assign(l.b.size(), 0.0);
    l.vb.assign(l.b.size(), 0.0);
  }
}

std::vector<double> Mlp::forward_cached(const std::vector<double>& in,
                                        std::vector<std::vector<double>>& acts) const {
  acts.clear();
  acts.push_back(in);
  std::vector<double> cur = in;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    std::vector<double> next(l.out, 0.0);
    for (int o = 0; o < l.out; ++o) {
      double acc = l.b[o];
      const double* wr = &l.w[static_cast<std::size_t>(o) * l.in];
      for (int j = 0; j < l.in; ++j) acc += wr[j] * cur[j];
      next[o] = acc;
    }
    const bool last = (i + 1 == layers_.size());
    if (!last) {
      for (auto& v : next) v = std::max(0.0, v);  // relu
    } else if (sigmoid_out_) {
      for (auto& v : next) v = sigmoid(v);
    }
    acts.push_back(next);
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> Mlp::forward(const std::vector<double>& in) const {
  std::vector<std::vector<double>> acts;
  return forward_cached(in, acts);
}

std::vector<double> Mlp::backward(const std::vector<double>& in,
                                  const std::vector<double>& dloss_dout) {
  std::vector<std::vector<double>> acts;
  forward_cached(in, acts);

  std::vector<double> delta = dloss_dout;
  // Output nonlinearity.
  if (sigmoid_out_) {
    const auto& out = acts.back();
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= out[i] * (1.0 - out[i]);
  }
  for (std::size_t i = layers_.size(); i-- > 0;) {
    Layer& l = layers_[i];
    const auto& input = acts[i];
    if (i + 1 != layers_.size()) {
      // Post-activation delta arriving from above; apply relu mask.
      const auto& out = acts[i + 1];
      for (int o = 0; o < l.out; ++o) {
        if (out[o] <= 0.0) delta[o] = 0.0;
      }
    }
    for (int o = 0; o < l.out; ++o) {
      double* gwr = &l.gw[static_cast<std::size_t>(o) * l.in];
      for (int j = 0; j < l.in; ++j) gwr[j] += delta[o] * input[j];
      l.gb[o] += delta[o];
    }
    std::vector<double> prev_delta(l.in, 0.0);
    for (int o = 0; o < l.out; ++o) {
      const double* wr = &l.w[static_cast<std::size_t>(o) * l.in];
      for (int j = 0; j < l.in; ++j) prev_delta[j] += wr[j] * delta[o];
    }
    delta = std::move(prev_delta);
  }
  return delta;
}

std::vector<double> Mlp::backward_input_only(const std::vector<double>& in,
                                             const std::vector<double>& dloss_dout) const {
  std::vector<std::vector<double>> acts;
  forward_cached(in, acts);
  std::vector<double> delta = dloss_dout;
  if (sigmoid_out_) {
    const auto& out = acts.back();
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= out[i] * (1.0 - out[i]);
  }
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& l = layers_[i];
    if (i + 1 != layers_.size()) {
      const auto& out = acts[i + 1];
      for (int o = 0; o < l.out; ++o) {
        if (out[o] <= 0.0) delta[o] = 0.0;
      }
    }
    std::vector<double> prev_delta(l.in, 0.0);
    for (int o = 0; o < l.out; ++o) {
      const double* wr = &l.w[static_cast<std::size_t>(o) * l.in];
      for (int j = 0; j < l.in; ++j) prev_delta[j] += wr[j] * delta[o];
    }
    delta = std::move(prev_delta);
  }
  return delta;
}

void Mlp::apply_grads(int batch_size) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  const double scale = 1.0 / std::max(1, batch_size);
  for (Layer& l : layers_) {
    for (std::size_t i = 0; i < l.w.size(); ++i) {
      const double g = l.gw[i] * scale;
      l.mw[i] = beta1 * l.mw[i] + (1 - beta1) * g;
      l.vw[i] = beta2 * l.vw[i] + (1 - beta2) * g * g;
      l.w[i] -= lr_ * (l.mw[i] / bc1) / (std::sqrt(l.vw[i] / bc2) + eps);
      l.gw[i] = 0.0;
    }
    for (std::size_t i = 0; i < l.b.size(); ++i) {
      const double g = l.gb[i] * scale;
      l.mb[i] = beta1 * l.mb[i] + (1 - beta1) * g;
      l.vb[i] = beta2 * l.vb[i] + (1 - beta2) * g * g;
      l.b[i] -= lr_ * (l.mb[i] / bc1) / (std::sqrt(l.vb[i] / bc2) + eps);
      l.gb[i] = 0.0;
    }
  }
}

DdpgAgent::DdpgAgent(AgentConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      rng_(static_cast<std::mt19937::result_type>(seed)),
      actor_({cfg.state_dim, cfg.hidden, cfg.hidden, cfg.action_dim}, true, cfg.actor_lr, rng_),
      critic_({cfg.state_dim + cfg.action_dim, cfg.hidden, cfg.hidden, 1}, false, cfg.critic_lr,
              rng_) {
  replay_.reserve(std::min<std::size_t>(cfg_.replay_capacity, 65536));
}

std::vector<double> DdpgAgent::act(const std::vector<double>& state, double noise_scale) {
  if (static_cast<int>(state.size()) != cfg_.state_dim) {
    throw Error(ErrorKind::validation, "agent: state dimension mismatch");
  }
  std::vector<double> a = actor_.forward(state);
  if (noise_scale > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_scale);
    for (auto& v : a) v += noise(rng_);
  }
  for (auto& v : a) v = std::clamp(v, 0.0, 1.0);
  return a;
}

void DdpgAgent::update(const std::vector<Transition>& episode) {
  for (const auto& t : episode) {
    if (replay_.size() < cfg_.replay_capacity) {
      replay_.push_back(t);
    } else {
      replay_[replay_next_ % cfg_.replay_capacity] = t;
      ++replay_next_;
    }
  }
  if (replay_.empty()) return;
  std::uniform_int_distribution<std::size_t> pick(0, replay_.size() - 1);
  std::vector<const Transition*> batch;
  for (int u = 0; u < cfg_.updates_per_episode; ++u) {
    batch.clear();
    const int bs = std::min<int>(cfg_.batch_size, static_cast<int>(replay_.size()));
    for (int i = 0; i < bs; ++i) batch.push_back(&replay_[pick(rng_)]);
    train_batch(batch);
  }
}

void DdpgAgent::train_batch(const std::vector<const Transition*>& batch) {
  // Critic: regress Q(s, a) onto the episode reward.
  for (const Transition* t : batch) {
    std::vector<double> sa = t->state;
    sa.insert(sa.end(), t->action.begin(), t->action.end());
    const double q = critic_.forward(sa)[0];
    critic_.backward(sa, {2.0 * (q - t->reward)});
  }
  critic_.apply_grads(static_cast<int>(batch.size()));

  // Actor: deterministic policy gradient, ascending dQ/da through the critic.
  for (const Transition* t : batch) {
    const std::vector<double> a = actor_.forward(t->state);
    std::vector<double> sa = t->state;
    sa.insert(sa.end(), a.begin(), a.end());
    const std::vector<double> dq_dsa = critic_.backward_input_only(sa, {1.0});
    std::vector<double> dloss_da(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      dloss_da[i] = -dq_dsa[cfg_.state_dim + static_cast<int>(i)];
    }
    actor_.backward(t->state, dloss_da);
  }
  actor_.apply_grads(static_cast<int>(batch.size()));
}

double DdpgAgent::critic_loss(const std::vector<Transition>& batch) const {
  double loss = 0.0;
  for (const auto& t : batch) {
    std::vector<double> sa = t.state;
    sa.insert(sa.end(), t.action.begin(), t.action.end());
    const double q = critic_.forward(sa)[0];
    loss += (q - t.reward) * (q - t.reward);
  }
  return loss / std::max<std::size_t>(1, batch.size());
}

void DdpgAgent::critic_fit_step(const std::vector<Transition>& batch) {
  for (const auto& t : batch) {
    std::vector<double> sa = t.state;
    sa.insert(sa.end(), t.action.begin(), t.action.end());
    const double q = critic_.forward(sa)[0];
    critic_.backward(sa, {2.0 * (q - t.reward)});
  }
  critic_.apply_grads(static_cast<int>(batch.size()));
}

}  // namespace imcopt
