#include "cbcomm/transport.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>

#include "cbcomm/error.hpp"

namespace cbcomm::transport {

namespace {

class TempFile {
 public:
  explicit TempFile(std::string_view contents) {
    std::string tmpl = (fs::temp_directory_path() / "cbcomm-XXXXXX").string();
    int fd = ::mkstemp(tmpl.data());
    if (fd < 0) throw ProviderError("cannot create temp file for provider payload", true);
    path_ = tmpl;
    std::size_t off = 0;
    while (off < contents.size()) {
      auto n = ::write(fd, contents.data() + off, contents.size() - off);
      if (n <= 0) {
        ::close(fd);
        throw ProviderError("cannot write provider payload", true);
      }
      off += static_cast<std::size_t>(n);
    }
    ::close(fd);
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

json parse_reply(const std::string& body, const std::string& who) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProviderError(fmt::format("{}: reply is not valid JSON ({})", who, e.what()), false);
  }
}

}  // namespace

json run_command(const std::string& command, const json& payload) {
  TempFile input(payload.dump());
  const auto full = fmt::format("({}) < {}", command, shell_quote(input.path()));
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) throw ProviderError(fmt::format("cannot start provider command '{}'", command), true);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw ProviderError(fmt::format("provider command '{}' failed (status {})", command, status), true);
  return parse_reply(out, command);
}

json http_post(const std::string& url, const json& payload) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) throw ConfigError(fmt::format("unsupported provider URL '{}'", url));
  const auto slash = url.find('/', kScheme.size());
  const auto host = url.substr(0, slash);
  const auto path = slash == std::string::npos ? std::string("/") : url.substr(slash);

  httplib::Client client(host);
  client.set_connection_timeout(10);
  client.set_read_timeout(300);
  auto res = client.Post(path, payload.dump(), "application/json");
  if (!res)
    throw ProviderError(fmt::format("{}: {}", url, httplib::to_string(res.error())), true);
  if (res->status != 200)
    throw ProviderError(fmt::format("{}: HTTP {}", url, res->status), res->status >= 500);
  return parse_reply(res->body, url);
}

}  // namespace cbcomm::transport
