#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "drtraffic/env.hpp"

namespace drtraffic {

/// Line protocol for driving one environment. Every frame is one line of
/// space-separated tokens terminated by '\n'; reals use "%.17g".
///
///   server greeting   HELLO drtraffic 1 <scene> <obs_dim> <continuous_dim> <discrete_count>
///   seed <n>          OK seed <n>                  (next seedless reset uses n, n+1, ...)
///   reset [<n>]       OBS <dim> <x1> ... <xdim>
///   step <a> [<k>]    STEP <reward> <done 0|1> <outcome> <dim> <x1> ... <xdim>
///   close             BYE                          (session ends)
///   any error         ERR <code> <message...>
///
/// Codes: EpisodeFinished and NotReset leave the session open;
/// ProtocolError (malformed frame) is followed by the server closing.
class ProtocolSession {
 public:
  explicit ProtocolSession(const EnvConfig& config);

  std::string greeting() const;
  /// Response to one request line (without its newline); always ends in '\n'.
  std::string handle(const std::string& line);
  bool closed() const { return closed_; }

 private:
  std::unique_ptr<Env> env_;
  std::uint64_t next_seed_ = 0;
  bool has_episode_ = false;
  bool closed_ = false;
};

std::string format_real(double x);

struct ServerOptions {
  int port = 0;  ///< 0 picks a free port
  /// Stop accepting after this many sessions (0 = run forever).
  int max_sessions = 0;
};

/// Blocking TCP server on 127.0.0.1, one thread per session. `on_listen`
/// receives the bound port before the first accept.
void serve(const EnvConfig& config, const ServerOptions& opt,
           const std::function<void(int port)>& on_listen,
           const std::atomic<bool>* stop = nullptr);

}  // namespace drtraffic
