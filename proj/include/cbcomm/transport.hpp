#pragma once

#include <string>

#include "cbcomm/io.hpp"

// JSON request/response plumbing shared by the embedding and sentiment
// providers. Transport failures raise retriable ProviderErrors; unparsable
// replies raise non-retriable ones.
namespace cbcomm::transport {

// Runs `command` via /bin/sh with `payload` on stdin; parses stdout as JSON.
json run_command(const std::string& command, const json& payload);

// POSTs `payload` to an http:// URL and parses the response body.
json http_post(const std::string& url, const json& payload);

}  // namespace cbcomm::transport
