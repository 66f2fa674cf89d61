#ifndef HARDLABEL_EXTERNAL_ORACLE_HPP
#define HARDLABEL_EXTERNAL_ORACLE_HPP

#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hardlabel/oracle.hpp"

namespace hardlabel {

/// Line protocol spoken by external oracle processes.
///
/// On startup the child writes one handshake line:
///     hardlabel-oracle <version> <d> <K>
/// Then, per query, the parent writes one line of d space-separated
/// decimals and the child answers with one line holding an integer label.
namespace oracle_protocol {

inline constexpr int kVersion = 1;
inline constexpr const char* kMagic = "hardlabel-oracle";

std::string handshake_line(std::size_t d, int k);
/// Encodes a query with round-trip precision.
std::string query_line(std::span<const double> x);

struct Handshake {
  int version = 0;
  std::size_t d = 0;
  int k = 0;
};
/// Throws LoadError on a malformed line or unsupported version.
Handshake parse_handshake(const std::string& line);

/// Serves `model` on the given streams until EOF. Returns the number of
/// queries answered.
std::size_t serve(const Model& model, std::istream& in, std::ostream& out);

}  // namespace oracle_protocol

/// Model backed by a child process speaking oracle_protocol. Queries are
/// serialised through a mutex, so one process can back several handles.
class ExternalProcessModel final : public Model {
 public:
  explicit ExternalProcessModel(std::vector<std::string> argv);
  ~ExternalProcessModel() override;

  ExternalProcessModel(const ExternalProcessModel&) = delete;
  ExternalProcessModel& operator=(const ExternalProcessModel&) = delete;

  std::size_t dimension() const override { return d_; }
  int num_classes() const override { return k_; }
  Label predict(std::span<const double> x) const override;
  std::string_view kind() const override { return "external"; }

  const std::vector<std::string>& command() const { return argv_; }

 private:
  std::string read_line() const;
  void write_all(const std::string& s) const;

  std::vector<std::string> argv_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::size_t d_ = 0;
  int k_ = 0;
  mutable std::mutex mu_;
  mutable std::string buffer_;
};

}  // namespace hardlabel

#endif  // HARDLABEL_EXTERNAL_ORACLE_HPP
