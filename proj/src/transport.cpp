// Copyright 2026 The vqtrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vqtrain/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <vector>

#include <json.hpp>

#include "vqtrain/errors.hpp"

namespace vqtrain {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_left(Clock::time_point deadline) {
  return std::chrono::duration<double>(deadline - Clock::now()).count();
}

// Line-framed socket with poll-based deadlines.
class Framed {
 public:
  explicit Framed(int fd) : fd_(fd) {}
  Framed() = default;
  Framed(Framed&& other) noexcept : fd_(other.fd_), buffer_(std::move(other.buffer_)) {
    other.fd_ = -1;
  }
  Framed& operator=(Framed&& other) noexcept {
    if (this != &other) {
      close_fd();
      fd_ = other.fd_;
      buffer_ = std::move(other.buffer_);
      other.fd_ = -1;
    }
    return *this;
  }
  ~Framed() { close_fd(); }

  int fd() const { return fd_; }

  void send_line(const std::string& line) {
    std::string framed = line;
    framed.push_back('\n');
    size_t sent = 0;
    while (sent < framed.size()) {
      const ssize_t n = ::send(fd_, framed.data() + sent, framed.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) throw ProtocolError("peer closed the connection while sending");
      sent += static_cast<size_t>(n);
    }
  }

  // Blocks until a full line arrives or the deadline passes.
  std::string recv_line(Clock::time_point deadline) {
    for (;;) {
      const size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const double remaining = seconds_left(deadline);
      if (remaining <= 0.0) throw BarrierTimeout("timed out waiting for a message");
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(remaining * 1000.0) + 1);
      if (ready < 0) throw ProtocolError("poll failed");
      if (ready == 0) throw BarrierTimeout("timed out waiting for a message");
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n <= 0) throw ProtocolError("peer closed the connection");
      buffer_.append(chunk, static_cast<size_t>(n));
    }
  }

 private:
  void close_fd() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int fd_ = -1;
  std::string buffer_;
};

json make_message(const char* type, long iteration, json payload) {
  return json{{"type", type}, {"iteration", iteration}, {"payload", std::move(payload)}};
}

json parse_message(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("unparseable message: ") + e.what());
  }
  if (!j.contains("type") || !j.contains("iteration") || !j.contains("payload")) {
    throw ProtocolError("message missing type/iteration/payload");
  }
  return j;
}

}  // namespace

// ---- server ----------------------------------------------------------------

namespace {

// Remote round executor: one connected worker per node.
class SocketExecutor : public RoundExecutor {
 public:
  SocketExecutor(std::vector<Framed> workers, double timeout_seconds)
      : workers_(std::move(workers)), timeout_(timeout_seconds) {}

  std::vector<GradientMessage> execute(long iteration, const ParameterVector& theta,
                                       std::span<const Sample> /*batch*/,
                                       std::span<const size_t> batch_indices,
                                       const std::vector<int>& node_of_group) override {
    const int num_nodes = static_cast<int>(workers_.size());
    const Partition partition =
        partition_parameters(static_cast<int>(theta.size()), num_nodes);

    // Broadcast this round's assignments first, then gather: a true barrier.
    for (int g = 0; g < num_nodes; ++g) {
      const int node = node_of_group[g];
      const uint64_t worker_seed =
          derive_seed(seed_, {stream::kWorker, static_cast<uint64_t>(iteration),
                              static_cast<uint64_t>(node)});
      json payload{{"node_id", node},
                   {"theta", theta.values},
                   {"group", {partition.ranges[g].lo, partition.ranges[g].hi}},
                   {"batch", std::vector<size_t>(batch_indices.begin(), batch_indices.end())},
                   {"seed", worker_seed}};
      workers_[node].send_line(make_message("params", iteration, std::move(payload)).dump());
    }

    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(timeout_));
    std::vector<GradientMessage> messages(num_nodes);
    // One line per connection per round; the shared deadline makes the
    // gather a barrier no matter which worker lags.
    for (int node = 0; node < num_nodes; ++node) {
      const json reply = parse_message(workers_[node].recv_line(deadline));
      if (reply.at("type").get<std::string>() != "grad") {
        throw ProtocolError("expected a grad message");
      }
      if (reply.at("iteration").get<long>() != iteration) {
        throw ProtocolError("gradient for the wrong iteration");
      }
      const json& payload = reply.at("payload");
      GradientMessage message;
      message.node_id = payload.at("node_id").get<int>();
      if (message.node_id != node) throw ProtocolError("gradient from an unexpected node");
      message.iteration = iteration;
      message.indices = payload.at("indices").get<std::vector<int>>();
      message.values = payload.at("values").get<std::vector<double>>();
      message.circuit_executions = payload.at("circuit_executions").get<long>();
      for (double v : message.values) {
        if (!std::isfinite(v)) throw ProtocolError("non-finite gradient component on the wire");
      }
      // Place the message in group order to mirror the in-process executor.
      int group = -1;
      for (int g = 0; g < num_nodes; ++g) {
        if (node_of_group[g] == node) group = g;
      }
      messages[group] = std::move(message);
    }
    return messages;
  }

  void finish(const TrainResult& result) override {
    const json payload{{"converged", result.converged}, {"iterations", result.iterations}};
    for (auto& worker : workers_) {
      try {
        worker.send_line(make_message("converged", result.iterations, payload).dump());
      } catch (const ProtocolError&) {
        // A worker that already hung up does not invalidate the result.
      }
    }
  }

  void set_seed(uint64_t seed) { seed_ = seed; }

 private:
  std::vector<Framed> workers_;
  double timeout_;
  uint64_t seed_ = 0;
};

}  // namespace

struct SocketServer::Impl {
  TrainConfig config;
  std::vector<Sample> train_set;
  double timeout;
  int listen_fd = -1;
  uint16_t port = 0;

  ~Impl() {
    if (listen_fd >= 0) ::close(listen_fd);
  }
};

SocketServer::SocketServer(TrainConfig config, std::vector<Sample> train_set,
                           double timeout_seconds, uint16_t port)
    : impl_(std::make_unique<Impl>()) {
  config.validate();
  if (config.compression_threshold.has_value() && config.alternate) {
    throw ConfigError(
        "socket transport cannot hand residuals between nodes; disable alternate "
        "scheduling or compression");
  }
  impl_->config = std::move(config);
  impl_->train_set = std::move(train_set);
  impl_->timeout = timeout_seconds;

  impl_->listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (impl_->listen_fd < 0) throw IoError("cannot create server socket");
  const int one = 1;
  ::setsockopt(impl_->listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw IoError("cannot bind server socket");
  }
  if (::listen(impl_->listen_fd, impl_->config.num_nodes()) != 0) {
    throw IoError("cannot listen on server socket");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
  impl_->port = ntohs(addr.sin_port);
}

SocketServer::~SocketServer() = default;

uint16_t SocketServer::port() const { return impl_->port; }

TrainResult SocketServer::run() {
  const int num_nodes = impl_->config.num_nodes();
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(impl_->timeout));
  std::vector<Framed> workers;
  workers.reserve(num_nodes);
  for (int i = 0; i < num_nodes; ++i) {
    const double remaining = seconds_left(deadline);
    if (remaining <= 0.0) throw BarrierTimeout("not all workers connected in time");
    pollfd pfd{impl_->listen_fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining * 1000.0) + 1);
    if (ready <= 0) throw BarrierTimeout("not all workers connected in time");
    const int fd = ::accept(impl_->listen_fd, nullptr, nullptr);
    if (fd < 0) throw IoError("accept failed");
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    workers.emplace_back(fd);
  }

  SocketExecutor executor(std::move(workers), impl_->timeout);
  executor.set_seed(impl_->config.seed);
  return train_with_executor(impl_->config, impl_->train_set, executor);
}

// ---- worker ----------------------------------------------------------------

void run_socket_worker(const std::string& host, uint16_t port, const WorkerContext& context) {
  if (context.compression_threshold.has_value() && context.alternate) {
    throw ConfigError(
        "socket transport cannot hand residuals between nodes; disable alternate "
        "scheduling or compression");
  }
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError("cannot create worker socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw IoError("bad server address: " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw IoError("cannot connect to the parameter server");
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  Framed server(fd);

  const Model model = make_classifier(2, context.layers, context.noise_mode);
  const int d = model.circuit.param_count();
  const int num_nodes = static_cast<int>(context.profiles.size());
  const Partition partition = partition_parameters(d, num_nodes);
  const bool compressed = context.compression_threshold.has_value();
  std::vector<std::vector<double>> residuals;
  for (int size : partition.sizes()) residuals.emplace_back(size, 0.0);

  int node_id = -1;
  long last_iteration = -1;
  const auto forever = Clock::now() + std::chrono::hours(24);
  for (;;) {
    const json message = parse_message(server.recv_line(forever));
    const std::string type = message.at("type").get<std::string>();
    if (type == "converged") return;
    if (type != "params") throw ProtocolError("unexpected message type: " + type);

    const long iteration = message.at("iteration").get<long>();
    if (iteration != last_iteration + 1) {
      throw ProtocolError("iterations must arrive in order, one at a time");
    }
    const json& payload = message.at("payload");
    const int assigned_node = payload.at("node_id").get<int>();
    if (node_id < 0) node_id = assigned_node;
    if (assigned_node != node_id || node_id >= num_nodes) {
      throw ProtocolError("server reassigned this worker's node id");
    }

    // Cross-check the server's slice against the locally derived schedule.
    const std::vector<int> node_of_group =
        context.alternate ? assign_alternate(iteration, num_nodes)
                          : assign_alternate(0, num_nodes);
    int group = -1;
    for (int g = 0; g < num_nodes; ++g) {
      if (node_of_group[g] == node_id) group = g;
    }
    const auto range = payload.at("group").get<std::vector<int>>();
    if (range.size() != 2) throw ProtocolError("malformed group range");
    const IndexRange assigned{range[0], range[1]};

    ParameterVector theta{payload.at("theta").get<std::vector<double>>()};
    if (static_cast<int>(theta.size()) != d) throw ProtocolError("theta length mismatch");
    std::vector<Sample> batch;
    for (const size_t index : payload.at("batch").get<std::vector<size_t>>()) {
      if (index >= context.train_set.size()) throw ProtocolError("batch index out of range");
      batch.push_back(context.train_set[index]);
    }
    const uint64_t seed = payload.at("seed").get<uint64_t>();

    GradientMessage reply =
        worker_step(model, node_id, iteration, theta, assigned, batch,
                    context.profiles[node_id], context.shots, context.lambda, seed, context.exec,
                    partition.ranges[group]);
    if (compressed) {
      std::vector<double>& residual = residuals[group];
      for (size_t k = 0; k < reply.values.size(); ++k) residual[k] += reply.values[k];
      const ClipResult clipped = clip_and_mask(residual, *context.compression_threshold);
      GradientMessage sparse;
      sparse.node_id = reply.node_id;
      sparse.iteration = reply.iteration;
      sparse.circuit_executions = reply.circuit_executions;
      for (size_t k = 0; k < clipped.mask.size(); ++k) {
        if (clipped.mask[k]) {
          sparse.indices.push_back(partition.ranges[group].lo + static_cast<int>(k));
          sparse.values.push_back(clipped.transmit[k]);
        }
      }
      residual = clipped.keep;
      reply = std::move(sparse);
    }

    json grad_payload{{"node_id", reply.node_id},
                      {"indices", reply.indices},
                      {"values", reply.values},
                      {"circuit_executions", reply.circuit_executions}};
    server.send_line(make_message("grad", iteration, std::move(grad_payload)).dump());
    last_iteration = iteration;
  }
}

}  // namespace vqtrain
