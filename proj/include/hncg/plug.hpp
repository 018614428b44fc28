#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace hncg {

// External process that consumes and produces image files. The command is a
// shell template; {name} placeholders are replaced by quoted absolute paths.
// Every plug template must name {in} and {out}.
struct PlugConfig {
    std::string command;
    double timeout_s = 120.0;
    std::filesystem::path working_dir;  // empty: inherit

    // Timeout from HNCG_PLUG_TIMEOUT when set, otherwise 120 s.
    static PlugConfig from_command(std::string command);
    static double default_timeout();

    void validate() const;
};

// Temporary directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Single-quotes a string for /bin/sh.
std::string shell_quote(const std::string& s);

// Substitutes placeholders; unknown placeholders are left untouched.
std::string expand_template(const std::string& command, const std::map<std::string, std::filesystem::path>& paths);

// Runs the plug and waits for it. Throws PlugError on launch failure, a
// nonzero exit status or timeout (the process group is killed).
void run_plug(const PlugConfig& plug, const std::map<std::string, std::filesystem::path>& paths);

}  // namespace hncg
