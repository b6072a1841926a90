#include "drtraffic/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>
#include <thread>
#include <vector>

#include "drtraffic/errors.hpp"

namespace drtraffic {

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

double parse_real(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ProtocolError("not a finite number: '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ProtocolError("not an unsigned integer: '" + s + "'");
  }
  errno = 0;
  const auto v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ProtocolError("integer out of range: '" + s + "'");
  return v;
}

std::string vector_frame(const std::vector<double>& v) {
  std::string out = std::to_string(v.size());
  for (double x : v) out += ' ' + format_real(x);
  return out;
}

}  // namespace

ProtocolSession::ProtocolSession(const EnvConfig& config) : env_(make_env(config)) {}

std::string ProtocolSession::greeting() const {
  const ActionSpace a = env_->action_space();
  return "HELLO drtraffic 1 " + std::string(scene_name(env_->scene())) + ' ' +
         std::to_string(env_->observation_dim()) + ' ' + std::to_string(a.low.size()) + ' ' +
         std::to_string(a.discrete_count) + '\n';
}

std::string ProtocolSession::handle(const std::string& line) {
  if (closed_) return "ERR ProtocolError session closed\n";
  try {
    const auto t = tokens(line);
    if (t.empty()) throw ProtocolError("empty frame");
    const std::string& cmd = t[0];
    if (cmd == "seed") {
      if (t.size() != 2) throw ProtocolError("usage: seed <n>");
      next_seed_ = parse_uint(t[1]);
      return "OK seed " + t[1] + '\n';
    }
    if (cmd == "reset") {
      if (t.size() > 2) throw ProtocolError("usage: reset [<seed>]");
      const std::uint64_t seed = t.size() == 2 ? parse_uint(t[1]) : next_seed_++;
      const auto obs = env_->reset(seed);
      has_episode_ = true;
      return "OBS " + vector_frame(obs) + '\n';
    }
    if (cmd == "step") {
      const ActionSpace space = env_->action_space();
      const std::size_t want = 1 + space.low.size() + (space.discrete_count > 0 ? 1 : 0);
      if (t.size() != want && !(space.discrete_count > 0 && t.size() == want - 1)) {
        throw ProtocolError("usage: step <accel>" +
                            std::string(space.discrete_count > 0 ? " [<lane_cmd>]" : ""));
      }
      EnvAction a;
      for (std::size_t i = 0; i < space.low.size(); ++i) a.continuous.push_back(parse_real(t[1 + i]));
      if (t.size() == want && space.discrete_count > 0) {
        const auto k = parse_uint(t.back());
        if (k >= static_cast<std::uint64_t>(space.discrete_count)) {
          throw ProtocolError("discrete action out of range: " + t.back());
        }
        a.discrete = static_cast<int>(k);
      }
      if (!has_episode_) return "ERR NotReset step before reset\n";
      if (env_->done()) return "ERR EpisodeFinished episode is done; send reset\n";
      const StepResult r = env_->step(a);
      return "STEP " + format_real(r.reward) + ' ' + (r.done ? "1 " : "0 ") +
             std::string(outcome_name(r.outcome)) + ' ' + vector_frame(r.observation) + '\n';
    }
    if (cmd == "close") {
      if (t.size() != 1) throw ProtocolError("usage: close");
      closed_ = true;
      return "BYE\n";
    }
    throw ProtocolError("unknown command '" + cmd + "'");
  } catch (const ProtocolError& e) {
    closed_ = true;
    return std::string("ERR ProtocolError ") + e.what() + '\n';
  }
}

namespace {

bool send_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::send(fd, s.data() + off, s.size() - off, MSG_NOSIGNAL);
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

void run_session(int fd, const EnvConfig& config) {
  ProtocolSession session(config);
  std::string buffer;
  char chunk[4096];
  bool ok = send_all(fd, session.greeting());
  while (ok && !session.closed()) {
    const std::size_t nl = buffer.find('\n');
    if (nl == std::string::npos) {
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      if (buffer.size() > (1 << 20)) {
        send_all(fd, "ERR ProtocolError frame too long\n");
        break;
      }
      continue;
    }
    std::string line = buffer.substr(0, nl);
    buffer.erase(0, nl + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ok = send_all(fd, session.handle(line));
  }
  ::close(fd);
}

}  // namespace

void serve(const EnvConfig& config, const ServerOptions& opt,
           const std::function<void(int)>& on_listen, const std::atomic<bool>* stop) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  const int yes = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(opt.port));
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(listener, 16) < 0) {
    const std::string err = std::strerror(errno);
    ::close(listener);
    throw std::runtime_error("bind/listen: " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listen) on_listen(ntohs(addr.sin_port));

  std::vector<std::thread> sessions;
  for (int accepted = 0; opt.max_sessions == 0 || accepted < opt.max_sessions;) {
    if (stop && stop->load()) break;
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    ++accepted;
    sessions.emplace_back(run_session, fd, std::cref(config));
  }
  for (auto& t : sessions) t.join();
  ::close(listener);
}

}  // namespace drtraffic
