#pragma once

// Dataset acquisition: a manifest of matrices (one CSV row each), filters
// over its metadata, and a downloader that fills a local cache with plain
// Matrix Market files. Archives from the SuiteSparse collection are
// gzip-compressed tarballs and are unpacked here.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <curl/curl.h>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <zlib.h>

#include "spmvlab/csv.hpp"
#include "spmvlab/matcore.hpp"

namespace spmvlab {

class FetchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string name;
  std::string group;
  std::string download_url;
  std::uint64_t nrows = 0;
  std::uint64_t nnz = 0;
  bool symmetric = false;
  std::string sha256;  // of the downloaded file; empty when unknown
  std::string local_path;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline constexpr std::string_view kManifestHeader =
    "name,group,download_url,nrows,nnz,symmetric,sha256,local_path";

inline std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  const auto records = parse_csv(text);
  if (records.empty() || csv_line(records.front()) != std::string(kManifestHeader) + "\n")
    throw FetchError("manifest: unexpected header");
  std::vector<ManifestEntry> out;
  std::set<std::string> names;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != 8) throw FetchError(fmt::format("manifest: row {} has {} fields", i, f.size()));
    ManifestEntry e{f[0], f[1], f[2], 0, 0, false, f[6], f[7]};
    try {
      e.nrows = detail::csv_number<std::uint64_t>(f[3], "nrows");
      e.nnz = detail::csv_number<std::uint64_t>(f[4], "nnz");
    } catch (const CsvError& err) {
      throw FetchError(fmt::format("manifest row {}: {}", i, err.what()));
    }
    if (f[5] != "0" && f[5] != "1")
      throw FetchError(fmt::format("manifest row {}: symmetric must be 0 or 1", i));
    e.symmetric = f[5] == "1";
    if (e.name.empty()) throw FetchError(fmt::format("manifest row {}: empty name", i));
    if (!names.insert(e.name).second)
      throw FetchError(fmt::format("manifest: duplicate name '{}'", e.name));
    out.push_back(std::move(e));
  }
  return out;
}

inline std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& e : entries)
    out += csv_line({e.name, e.group, e.download_url, fmt::format("{}", e.nrows),
                     fmt::format("{}", e.nnz), e.symmetric ? "1" : "0", e.sha256, e.local_path});
  return out;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

struct ManifestFilter {
  bool symmetric_only = false;
  std::uint64_t min_rows = 0;  // keep entries with strictly more rows than this

  bool keep(const ManifestEntry& e) const {
    return (!symmetric_only || e.symmetric) && e.nrows > min_rows;
  }
};

inline std::vector<ManifestEntry> select(const std::vector<ManifestEntry>& entries,
                                         const ManifestFilter& filter) {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (filter.keep(e)) out.push_back(e);
  return out;
}

/// Builds a manifest from the collection's ssstats.csv index. The first two
/// lines hold the matrix count and the index date; each following row starts
/// with group, name, nrows, ncols, nnz, and column 11 holds the numerical
/// symmetry (1 means symmetric).
inline std::vector<ManifestEntry> manifest_from_ssstats(
    std::string_view text, std::string_view base_url = "https://sparse.tamu.edu/MM") {
  auto records = parse_csv(text);
  if (records.size() < 2) throw FetchError("ssstats: too short");
  std::vector<ManifestEntry> out;
  std::set<std::string> names;
  for (std::size_t i = 2; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() < 11) throw FetchError(fmt::format("ssstats: row {} has {} fields", i, f.size()));
    ManifestEntry e;
    e.group = f[0];
    e.name = f[1];
    e.nrows = detail::csv_number<std::uint64_t>(f[2], "nrows");
    const auto ncols = detail::csv_number<std::uint64_t>(f[3], "ncols");
    e.nnz = detail::csv_number<std::uint64_t>(f[4], "nnz");
    e.symmetric = e.nrows == ncols && std::stod(f[10]) == 1.0;
    e.download_url = fmt::format("{}/{}/{}.tar.gz", base_url, e.group, e.name);
    // Names repeat across groups in the collection; keep the first and
    // qualify the rest so the cache layout stays flat.
    if (!names.insert(e.name).second) {
      e.name = e.group + "_" + e.name;
      names.insert(e.name);
    }
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checksums and archives

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw FetchError("sha256 failed");
  std::string out;
  for (unsigned i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

inline std::string gunzip(std::string_view data) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw FetchError("gunzip: init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  std::string out;
  char buf[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FetchError(fmt::format("gunzip: corrupt stream ({})", rc));
    }
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw FetchError("gunzip: truncated stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

/// Returns the body of the first regular file in a ustar archive whose base
/// name equals `file_name`.
inline std::optional<std::string> tar_extract(std::string_view tar, std::string_view file_name) {
  auto field = [](std::string_view block, std::size_t off, std::size_t len) {
    auto s = block.substr(off, len);
    return std::string(s.substr(0, s.find('\0')));
  };
  std::size_t pos = 0;
  while (pos + 512 <= tar.size()) {
    const auto header = tar.substr(pos, 512);
    if (header.find_first_not_of('\0') == std::string_view::npos) break;
    std::string name = field(header, 0, 100);
    const std::string prefix = field(header, 345, 155);
    if (!prefix.empty() && header.substr(257, 5) == "ustar") name = prefix + "/" + name;
    const std::uint64_t size = std::strtoull(field(header, 124, 12).c_str(), nullptr, 8);
    const char type = header[156];
    pos += 512;
    if (pos + size > tar.size()) throw FetchError("tar: truncated archive");
    if ((type == '0' || type == '\0') && std::filesystem::path(name).filename() == file_name)
      return std::string(tar.substr(pos, size));
    pos += (size + 511) / 512 * 512;
  }
  return std::nullopt;
}

/// Turns a downloaded payload into Matrix Market text based on the URL
/// suffix (.tar.gz, .gz or plain).
inline std::string unpack_download(std::string_view payload, std::string_view url,
                                   const std::string& name) {
  if (url.ends_with(".tar.gz") || url.ends_with(".tgz")) {
    auto body = tar_extract(gunzip(payload), name + ".mtx");
    if (!body) throw FetchError(fmt::format("archive for '{}' has no {}.mtx", name, name));
    return *body;
  }
  if (url.ends_with(".gz")) return gunzip(payload);
  return std::string(payload);
}

// ---------------------------------------------------------------------------
// Downloading

/// Fetches `url` and returns the response body; throws on failure.
using Downloader = std::function<std::string(const std::string& url)>;

namespace detail {
inline std::size_t curl_append(char* data, std::size_t size, std::size_t n, void* out) {
  static_cast<std::string*>(out)->append(data, size * n);
  return size * n;
}
}  // namespace detail

/// libcurl GET; follows redirects and treats HTTP errors as failures.
inline std::string curl_download(const std::string& url) {
  static std::once_flag init;
  std::call_once(init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  CURL* h = curl_easy_init();
  if (!h) throw FetchError("curl: init failed");
  std::string body;
  char err[CURL_ERROR_SIZE] = {0};
  curl_easy_setopt(h, CURLOPT_URL, url.c_str());
  curl_easy_setopt(h, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(h, CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(h, CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(h, CURLOPT_CONNECTTIMEOUT, 30L);
  curl_easy_setopt(h, CURLOPT_WRITEFUNCTION, detail::curl_append);
  curl_easy_setopt(h, CURLOPT_WRITEDATA, &body);
  curl_easy_setopt(h, CURLOPT_ERRORBUFFER, err);
  const CURLcode rc = curl_easy_perform(h);
  curl_easy_cleanup(h);
  if (rc != CURLE_OK)
    throw FetchError(fmt::format("download of {} failed: {}", url, err[0] ? err : curl_easy_strerror(rc)));
  return body;
}

inline std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("SPMVLAB_CACHE"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home)
    return std::filesystem::path(home) / ".cache" / "spmvlab";
  return ".spmvlab-cache";
}

struct FetchOptions {
  std::filesystem::path cache_dir = default_cache_dir();
  bool offline = false;
  unsigned retries = 3;  // attempts after the first
  std::chrono::milliseconds backoff{500};  // doubled after each failed attempt
  unsigned jobs = 4;
  Downloader download = curl_download;
};

struct FetchOutcome {
  enum class Status { Cached, Downloaded, Missing, Failed };
  std::string name;
  Status status = Status::Failed;
  std::filesystem::path path;
  std::string message;
  unsigned attempts = 0;
};

struct FetchReport {
  std::vector<FetchOutcome> outcomes;  // manifest order

  std::size_t count(FetchOutcome::Status s) const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.status == s;
    return n;
  }
  bool ok() const { return count(FetchOutcome::Status::Failed) + count(FetchOutcome::Status::Missing) == 0; }
};

inline std::filesystem::path cached_path(const FetchOptions& opt, const ManifestEntry& e) {
  if (!e.local_path.empty()) return e.local_path;
  return opt.cache_dir / (e.name + ".mtx");
}

inline FetchOutcome fetch_one(const ManifestEntry& e, const FetchOptions& opt) {
  using Status = FetchOutcome::Status;
  FetchOutcome out{e.name, Status::Failed, cached_path(opt, e), {}, 0};
  if (std::filesystem::exists(out.path)) {
    out.status = Status::Cached;
    return out;
  }
  if (opt.offline) {
    out.status = Status::Missing;
    out.message = "not in cache (offline)";
    return out;
  }
  auto delay = opt.backoff;
  for (unsigned attempt = 0; attempt <= opt.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    ++out.attempts;
    std::string payload;
    try {
      payload = opt.download(e.download_url);
    } catch (const std::exception& err) {
      out.message = err.what();
      continue;
    }
    // A digest mismatch is not retried: the manifest and the server disagree.
    if (!e.sha256.empty()) {
      const auto got = sha256_hex(payload);
      if (got != e.sha256) {
        out.message = fmt::format("checksum mismatch: expected {}, got {}", e.sha256, got);
        return out;
      }
    }
    try {
      std::filesystem::create_directories(out.path.parent_path());
      write_file_atomic(out.path, unpack_download(payload, e.download_url, e.name));
    } catch (const std::exception& err) {
      out.message = err.what();
      return out;
    }
    out.status = Status::Downloaded;
    out.message.clear();
    return out;
  }
  return out;
}

/// Fetches every entry, at most `opt.jobs` at a time. Failures are recorded
/// in the report and do not stop the remaining downloads.
inline FetchReport fetch_all(const std::vector<ManifestEntry>& entries, const FetchOptions& opt) {
  FetchReport report;
  report.outcomes.resize(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) report.outcomes[i] = fetch_one(entries[i], opt);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(entries.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

}  // namespace spmvlab
