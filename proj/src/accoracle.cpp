#include "imcopt/accoracle.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "imcopt/error.hpp"

namespace imcopt {

using nlohmann::json;

double proxy_accuracy(const QuantPolicy& policy, const ProxyParams& params) {
  const std::size_t L = policy.size();
  if (!params.sigma.empty() && params.sigma.size() != L) {
    throw Error(ErrorKind::validation, "proxy oracle: sigma does not cover all layers");
  }
  double degradation = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double sigma =
        params.sigma.empty() ? 1.0 / static_cast<double>(L) : params.sigma[l];
    if (sigma < 0) throw Error(ErrorKind::validation, "proxy oracle: sigma must be >= 0");
    const double w_term = (std::exp2(8 - policy.bits[l].w_bits) - 1.0) * params.eps_w;
    const double a_term = (std::exp2(8 - policy.bits[l].a_bits) - 1.0) * params.eps_a;
    degradation += sigma * (w_term + a_term);
  }
  return std::clamp(params.acc_fp - degradation, 0.0, 1.0);
}

std::string oracle_request_json(const std::string& network_name, const NetworkGraph& net,
                                const QuantPolicy& policy) {
  policy.validate(net);
  json layers = json::array();
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    layers.push_back({{"name", net.layers[i].name},
                      {"w_bits", policy.bits[i].w_bits},
                      {"a_bits", policy.bits[i].a_bits}});
  }
  json req = {{"protocol", 1}, {"network", network_name}, {"layers", layers}};
  return req.dump();
}

QuantPolicy parse_oracle_request(const std::string& line, std::string* network_name) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::oracle, std::string("bad oracle request: ") + e.what());
  }
  if (req.value("protocol", 0) != 1) {
    throw Error(ErrorKind::oracle, "oracle request: unsupported protocol version");
  }
  if (network_name) *network_name = req.value("network", "");
  QuantPolicy policy;
  for (const auto& l : req.at("layers")) {
    policy.bits.push_back({l.at("w_bits").get<int>(), l.at("a_bits").get<int>()});
  }
  return policy;
}

double parse_oracle_response(const std::string& line) {
  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::oracle, std::string("malformed oracle response: ") + e.what());
  }
  if (!resp.is_object() || !resp.contains("accuracy") || !resp["accuracy"].is_number()) {
    throw Error(ErrorKind::oracle, "oracle response lacks a numeric 'accuracy' field");
  }
  const double acc = resp["accuracy"].get<double>();
  if (!(acc >= 0.0 && acc <= 1.0)) {
    throw Error(ErrorKind::oracle,
                "oracle accuracy " + std::to_string(acc) + " outside [0, 1]");
  }
  return acc;
}

// One long-lived child per oracle; a request is one line out, one line back.
struct AccuracyOracle::Child {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string buffered;

  ~Child() { terminate(); }

  void terminate() {
    if (to_child >= 0) close(to_child);
    if (from_child >= 0) close(from_child);
    to_child = from_child = -1;
    if (pid > 0) {
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      pid = -1;
    }
  }

  void spawn(const std::string& command) {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
      throw Error(ErrorKind::oracle, "oracle: pipe() failed");
    }
    pid = fork();
    if (pid < 0) throw Error(ErrorKind::oracle, "oracle: fork() failed");
    if (pid == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      close(in_pipe[0]);
      close(in_pipe[1]);
      close(out_pipe[0]);
      close(out_pipe[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child = in_pipe[1];
    from_child = out_pipe[0];
    fcntl(from_child, F_SETFL, O_NONBLOCK);
  }

  void write_line(const std::string& line) {
    std::string msg = line;
    msg.push_back('\n');
    std::size_t off = 0;
    while (off < msg.size()) {
      const ssize_t n = write(to_child, msg.data() + off, msg.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorKind::oracle, std::string("oracle: write failed: ") + strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(double timeout_s) {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    for (;;) {
      const auto nl = buffered.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffered.substr(0, nl);
        buffered.erase(0, nl + 1);
        return line;
      }
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) throw Error(ErrorKind::oracle, "oracle: response timed out");
      pollfd pfd{from_child, POLLIN, 0};
      const int remaining_ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
      const int pr = poll(&pfd, 1, std::max(1, remaining_ms));
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorKind::oracle, "oracle: poll failed");
      }
      if (pr == 0) throw Error(ErrorKind::oracle, "oracle: response timed out");
      char buf[4096];
      const ssize_t n = read(from_child, buf, sizeof(buf));
      if (n == 0) throw Error(ErrorKind::oracle, "oracle: child closed its output");
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw Error(ErrorKind::oracle, std::string("oracle: read failed: ") + strerror(errno));
      }
      buffered.append(buf, static_cast<std::size_t>(n));
    }
  }
};

AccuracyOracle::AccuracyOracle() = default;
AccuracyOracle::AccuracyOracle(AccuracyOracle&&) noexcept = default;
AccuracyOracle& AccuracyOracle::operator=(AccuracyOracle&&) noexcept = default;
AccuracyOracle::~AccuracyOracle() = default;

AccuracyOracle AccuracyOracle::proxy(ProxyParams params) {
  AccuracyOracle o;
  o.kind_ = Kind::proxy;
  o.proxy_ = std::move(params);
  return o;
}

AccuracyOracle AccuracyOracle::external(std::string command, double timeout_s) {
  if (command.empty()) {
    throw Error(ErrorKind::usage, "external oracle requires a non-empty command");
  }
  AccuracyOracle o;
  o.kind_ = Kind::external;
  o.command_ = std::move(command);
  o.timeout_s_ = timeout_s;
  return o;
}

double AccuracyOracle::evaluate(const NetworkGraph& net, const QuantPolicy& policy) const {
  policy.validate(net);
  if (kind_ == Kind::proxy) {
    double acc = proxy_accuracy(policy, proxy_);
    return acc;
  }
  signal(SIGPIPE, SIG_IGN);  // dead children surface as EPIPE instead
  if (!child_ || child_->pid < 0) {
    child_ = std::make_unique<Child>();
    child_->spawn(command_);
  }
  try {
    child_->write_line(oracle_request_json(net.name, net, policy));
    const std::string line = child_->read_line(timeout_s_);
    return parse_oracle_response(line);
  } catch (const Error&) {
    child_->terminate();  // respawn on the next request
    throw;
  }
}

}  // namespace imcopt
