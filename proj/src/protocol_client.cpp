#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "trusteq/backends.hpp"
#include "trusteq/error.hpp"

namespace trusteq {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

class ProtocolClient::Connection {
 public:
  explicit Connection(const ProtocolEndpoint& endpoint) {
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });
    if (!endpoint.command.empty()) {
      spawn(endpoint.command);
    } else if (!endpoint.tcp.empty()) {
      connect_tcp(endpoint.tcp);
    } else {
      throw Error(ErrorCode::kConfigError, "protocol endpoint needs a command or a tcp address");
    }
  }

  ~Connection() { close_all(); }

  bool healthy() const { return healthy_; }
  void mark_broken() { healthy_ = false; }

  void write_line(const std::string& line, Clock::time_point deadline) {
    std::string data = line + "\n";
    std::size_t sent = 0;
    while (sent < data.size()) {
      wait_ready(write_fd_, POLLOUT, deadline);
      const ssize_t n = socket_ ? ::send(write_fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL)
                                : ::write(write_fd_, data.data() + sent, data.size() - sent);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        healthy_ = false;
        throw Error(ErrorCode::kBackendUnavailable, std::string("write failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(Clock::time_point deadline) {
    for (;;) {
      if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      wait_ready(read_fd_, POLLIN, deadline);
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        healthy_ = false;
        throw Error(ErrorCode::kBackendUnavailable, std::string("read failed: ") + std::strerror(errno));
      }
      if (n == 0) {
        healthy_ = false;
        throw Error(ErrorCode::kBackendUnavailable, "backend closed the connection");
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void shutdown(std::chrono::milliseconds grace) {
    if (healthy_) {
      try {
        write_line(R"({"op":"shutdown"})", Clock::now() + grace);
      } catch (const Error&) {
      }
    }
    close_all(grace);
  }

 private:
  void wait_ready(int fd, short events, Clock::time_point deadline) {
    for (;;) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) {
        healthy_ = false;
        throw Error(ErrorCode::kTimeout, "no reply from backend within timeout");
      }
      pollfd p{fd, events, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (rc > 0) return;
      if (rc < 0 && errno != EINTR) {
        healthy_ = false;
        throw Error(ErrorCode::kBackendUnavailable, std::string("poll failed: ") + std::strerror(errno));
      }
    }
  }

  void spawn(const std::vector<std::string>& command) {
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
      throw Error(ErrorCode::kBackendUnavailable, "pipe creation failed");
    }
    std::vector<char*> argv;
    for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
    argv.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) throw Error(ErrorCode::kBackendUnavailable, "fork failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execvp(argv[0], argv.data());
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
  }

  void connect_tcp(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kConfigError, "tcp endpoint must be host:port, got '" + address + "'");
    }
    const std::string host = address.substr(0, colon);
    const std::string port = address.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &found) != 0) {
      throw Error(ErrorCode::kBackendUnavailable, "cannot resolve " + address);
    }
    int fd = -1;
    for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(found);
    if (fd < 0) throw Error(ErrorCode::kBackendUnavailable, "cannot connect to " + address);
    socket_ = true;
    read_fd_ = write_fd_ = fd;
  }

  void close_all(std::chrono::milliseconds grace = std::chrono::milliseconds(0)) {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0 && read_fd_ != write_fd_) ::close(read_fd_);
    write_fd_ = read_fd_ = -1;
    healthy_ = false;
    if (pid_ > 0) {
      const auto deadline = Clock::now() + grace;
      int status = 0;
      while (::waitpid(pid_, &status, WNOHANG) == 0) {
        if (Clock::now() >= deadline) {
          ::kill(pid_, SIGKILL);
          ::waitpid(pid_, &status, 0);
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      pid_ = -1;
    }
  }

  int read_fd_ = -1;
  int write_fd_ = -1;
  pid_t pid_ = -1;
  bool socket_ = false;
  bool healthy_ = true;
  std::string buffer_;
};

namespace {

json parse_reply(const std::string& line, ErrorCode on_error) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) throw Error(on_error, "reply is not a JSON object: " + line);
    return j;
  } catch (const json::exception&) {
    throw Error(on_error, "reply is not JSON: " + line.substr(0, 200));
  }
}

}  // namespace

ProtocolClient::ProtocolClient(const ProtocolEndpoint& endpoint, std::chrono::milliseconds timeout)
    : connection_(std::make_unique<Connection>(endpoint)), timeout_(timeout) {
  const auto deadline = Clock::now() + timeout_;
  connection_->write_line(R"({"op":"handshake"})", deadline);
  const json reply = parse_reply(connection_->read_line(deadline), ErrorCode::kHandshakeError);
  if (auto it = reply.find("error"); it != reply.end()) {
    throw Error(ErrorCode::kHandshakeError, "backend reported: " + it->dump());
  }
  try {
    num_classes_ = reply.at("num_classes").get<int>();
    if (auto it = reply.find("class_names"); it != reply.end() && !it->is_null()) {
      class_names_ = it->get<std::vector<std::string>>();
    }
    if (auto it = reply.find("model_name"); it != reply.end() && !it->is_null()) {
      model_name_ = it->get<std::string>();
    }
    if (auto it = reply.find("mask_token"); it != reply.end() && !it->is_null()) {
      mask_token_ = it->get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kHandshakeError, std::string("malformed handshake: ") + e.what());
  }
  if (num_classes_ < 2) throw Error(ErrorCode::kHandshakeError, "num_classes must be >= 2");
  if (class_names_.empty()) class_names_ = PredictionBackend::class_names();
  if (static_cast<int>(class_names_.size()) != num_classes_) {
    throw Error(ErrorCode::kHandshakeError, "class_names length differs from num_classes");
  }
}

ProtocolClient::~ProtocolClient() {
  std::lock_guard lock(mutex_);
  connection_->shutdown(std::min(timeout_, std::chrono::milliseconds(2000)));
}

Eigen::MatrixXd ProtocolClient::predict_proba(std::span<const TextPair> texts) const {
  const auto n = static_cast<Eigen::Index>(texts.size());
  if (n == 0) return Eigen::MatrixXd(0, num_classes_);

  json request{{"op", "predict"}, {"texts", json::array()}};
  for (const auto& t : texts) {
    request["texts"].push_back({{"a", t.a}, {"b", t.b ? json(*t.b) : json(nullptr)}});
  }

  std::string line;
  {
    std::lock_guard lock(mutex_);
    if (!connection_->healthy()) {
      throw Error(ErrorCode::kBackendUnavailable, "connection to backend is no longer usable");
    }
    const auto deadline = Clock::now() + timeout_;
    connection_->write_line(request.dump(), deadline);
    line = connection_->read_line(deadline);
  }

  const json reply = parse_reply(line, ErrorCode::kProtocolViolation);
  const auto it = reply.find("probs");
  if (it == reply.end() || !it->is_array()) {
    throw Error(ErrorCode::kProtocolViolation, "reply lacks a 'probs' array");
  }
  if (static_cast<Eigen::Index>(it->size()) != n) {
    throw Error(ErrorCode::kProtocolViolation, "reply has " + std::to_string(it->size()) +
                                                   " rows for a batch of " + std::to_string(n));
  }
  Eigen::MatrixXd probs(n, num_classes_);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = (*it)[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != num_classes_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "row " + std::to_string(r) + " does not have " + std::to_string(num_classes_) + " entries");
    }
    for (int c = 0; c < num_classes_; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) {
        throw Error(ErrorCode::kProtocolViolation, "non-numeric probability");
      }
      probs(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  check_probabilities(probs, n, num_classes_);
  return probs;
}

std::unique_ptr<PredictionBackend> protocol_client(const ProtocolEndpoint& endpoint,
                                                   std::chrono::milliseconds timeout) {
  return std::make_unique<ProtocolClient>(endpoint, timeout);
}

}  // namespace trusteq
