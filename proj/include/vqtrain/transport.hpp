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

#ifndef VQTRAIN_TRANSPORT_HPP_
#define VQTRAIN_TRANSPORT_HPP_

#include <cstdint>
#include <memory>
#include <string>

#include "vqtrain/runtime.hpp"

namespace vqtrain {

// Newline-delimited JSON protocol over TCP. Every line is one message:
//   {"type": "params" | "grad" | "converged", "iteration": t, "payload": {...}}
// params payload: node_id, theta, group [lo, hi), batch (example indices),
//                 seed. grad payload: node_id, indices, values,
//                 circuit_executions. converged payload: converged,
//                 iterations.
//
// The in-process channel is the reference semantics; this transport carries
// the identical numbers, so a socket run reproduces the in-process history
// bit for bit.

// Parameter server over a loopback/TCP listener. Construction binds and
// listens; run() accepts the M workers, drives the training loop, and
// broadcasts the final "converged" message.
class SocketServer {
 public:
  // port 0 picks a free port (see port()). The timeout bounds how long the
  // barrier waits for worker connections and for each round's messages;
  // expiry aborts the run with BarrierTimeout.
  SocketServer(TrainConfig config, std::vector<Sample> train_set, double timeout_seconds,
               uint16_t port = 0);
  ~SocketServer();

  SocketServer(const SocketServer&) = delete;
  SocketServer& operator=(const SocketServer&) = delete;

  uint16_t port() const;
  TrainResult run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Everything one remote worker needs to serve gradient requests. Profiles
// for all nodes are carried so the worker can adopt whichever node id the
// server assigns it on first contact.
struct WorkerContext {
  int layers = 4;
  NoiseMode noise_mode = NoiseMode::kPerGate;
  std::vector<NoiseProfile> profiles;
  Shots shots = Shots::sampled(8192);
  double lambda = 0.0;
  bool alternate = false;
  std::optional<double> compression_threshold;
  std::vector<Sample> train_set;
  Exec exec = Exec::kSerial;
};

// Connects to the server and answers "params" rounds until "converged".
// Validates every assignment against the schedule it derives locally and
// throws ProtocolError on any mismatch. A compressed worker keeps its
// residuals per group, which is only sound without alternate scheduling;
// that combination is rejected up front.
void run_socket_worker(const std::string& host, uint16_t port, const WorkerContext& context);

}  // namespace vqtrain

#endif  // VQTRAIN_TRANSPORT_HPP_
