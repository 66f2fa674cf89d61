#include "hardlabel/external_oracle.hpp"

#include <cerrno>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace hardlabel {

namespace oracle_protocol {

std::string handshake_line(std::size_t d, int k) {
  return std::string(kMagic) + " " + std::to_string(kVersion) + " " +
         std::to_string(d) + " " + std::to_string(k) + "\n";
}

std::string query_line(std::span<const double> x) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto res = std::to_chars(buf, buf + sizeof buf, x[i]);
    if (i) out.push_back(' ');
    out.append(buf, res.ptr);
  }
  out.push_back('\n');
  return out;
}

Handshake parse_handshake(const std::string& line) {
  std::istringstream in(line);
  std::string magic;
  Handshake h;
  long long d = -1;
  if (!(in >> magic >> h.version >> d >> h.k) || magic != kMagic) {
    throw LoadError("handshake", "malformed handshake line '" + line + "'");
  }
  if (h.version != kVersion) {
    throw LoadError("handshake", "unsupported protocol version " +
                                     std::to_string(h.version));
  }
  if (d < 1 || h.k < 2) {
    throw LoadError("handshake", "invalid dimension or class count");
  }
  h.d = static_cast<std::size_t>(d);
  return h;
}

std::size_t serve(const Model& model, std::istream& in, std::ostream& out) {
  std::size_t d = model.dimension();
  out << handshake_line(d, model.num_classes()) << std::flush;
  std::string line;
  std::size_t answered = 0;
  std::vector<double> x;
  while (std::getline(in, line)) {
    x.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) break;
      x.push_back(v);
      p = res.ptr;
    }
    int label = -1;
    if ((d == 0 || x.size() == d) && !x.empty() && all_finite(x)) {
      label = model.predict(x).value;
    }
    out << label << '\n' << std::flush;
    ++answered;
  }
  return answered;
}

}  // namespace oracle_protocol

ExternalProcessModel::ExternalProcessModel(std::vector<std::string> argv)
    : argv_(std::move(argv)) {
  if (argv_.empty()) throw LoadError("command", "empty command");
  int sv[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw LoadError("command", std::string("socketpair: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, sv[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, sv[1], STDOUT_FILENO);

  std::vector<char*> cargv;
  for (auto& a : argv_) cargv.push_back(a.data());
  cargv.push_back(nullptr);

  pid_t pid = -1;
  int rc = posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(sv[1]);
  if (rc != 0) {
    close(sv[0]);
    throw LoadError("command", "cannot start '" + argv_[0] + "': " +
                                   std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = sv[0];
  from_child_ = sv[0];

  try {
    auto h = oracle_protocol::parse_handshake(read_line());
    d_ = h.d;
    k_ = h.k;
  } catch (...) {
    close(to_child_);
    waitpid(pid_, nullptr, 0);
    throw;
  }
}

ExternalProcessModel::~ExternalProcessModel() {
  if (to_child_ >= 0) close(to_child_);
  if (pid_ > 0) waitpid(pid_, nullptr, 0);
}

std::string ExternalProcessModel::read_line() const {
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error("external oracle: child closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalProcessModel::write_all(const std::string& s) const {
  std::size_t off = 0;
  while (off < s.size()) {
    ssize_t n = send(to_child_, s.data() + off, s.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error("external oracle: write failed");
    off += static_cast<std::size_t>(n);
  }
}

Label ExternalProcessModel::predict(std::span<const double> x) const {
  std::lock_guard lock(mu_);
  write_all(oracle_protocol::query_line(x));
  std::string line = read_line();
  int label = -1;
  auto res = std::from_chars(line.data(), line.data() + line.size(), label);
  if (res.ec != std::errc() || label < 0 || label >= k_) {
    throw Error("external oracle: bad reply '" + line + "'");
  }
  return Label{label};
}

}  // namespace hardlabel
