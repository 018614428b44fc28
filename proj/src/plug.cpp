#include "hncg/plug.hpp"

#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <system_error>
#include <thread>
#include <vector>

#include "hncg/error.hpp"

namespace hncg {

PlugConfig PlugConfig::from_command(std::string command) {
    PlugConfig plug;
    plug.command = std::move(command);
    plug.timeout_s = default_timeout();
    return plug;
}

double PlugConfig::default_timeout() {
    if (const char* env = std::getenv("HNCG_PLUG_TIMEOUT")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && *end == '\0' && v > 0.0) return v;
        throw ValidationError(std::string("HNCG_PLUG_TIMEOUT must be a positive number, got '") + env + "'");
    }
    return 120.0;
}

void PlugConfig::validate() const {
    if (command.find("{in}") == std::string::npos || command.find("{out}") == std::string::npos) {
        throw ValidationError("plug command must contain {in} and {out}: " + command);
    }
    if (!(timeout_s > 0.0)) throw ValidationError("plug timeout must be positive");
}

TempDir::TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "hncg-XXXXXX").string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    if (::mkdtemp(buf.data()) == nullptr) {
        throw std::system_error(errno, std::generic_category(), "mkdtemp");
    }
    path_ = buf.data();
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

std::string expand_template(const std::string& command, const std::map<std::string, std::filesystem::path>& paths) {
    std::string out;
    for (std::size_t i = 0; i < command.size();) {
        if (command[i] == '{') {
            const auto close = command.find('}', i);
            if (close != std::string::npos) {
                const auto it = paths.find(command.substr(i + 1, close - i - 1));
                if (it != paths.end()) {
                    out += shell_quote(std::filesystem::absolute(it->second).string());
                    i = close + 1;
                    continue;
                }
            }
        }
        out += command[i++];
    }
    return out;
}

void run_plug(const PlugConfig& plug, const std::map<std::string, std::filesystem::path>& paths) {
    plug.validate();
    const std::string cmd = expand_template(plug.command, paths);

    const pid_t pid = ::fork();
    if (pid < 0) throw PlugError(PlugError::Reason::launch_failed, "fork failed for plug: " + cmd);
    if (pid == 0) {
        ::setpgid(0, 0);
        if (!plug.working_dir.empty() && ::chdir(plug.working_dir.c_str()) != 0) ::_exit(126);
        ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);

    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration<double>(plug.timeout_s);
    auto pause = std::chrono::microseconds(200);
    int status = 0;
    for (;;) {
        const pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0 && errno != EINTR) throw PlugError(PlugError::Reason::launch_failed, "waitpid failed for plug: " + cmd);
        if (clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            throw PlugError(PlugError::Reason::timeout,
                            "plug timed out after " + std::to_string(plug.timeout_s) + " s: " + cmd);
        }
        std::this_thread::sleep_for(pause);
        pause = std::min(pause * 2, std::chrono::microseconds(20000));
    }

    if (WIFSIGNALED(status)) {
        throw PlugError(PlugError::Reason::exit_status,
                        "plug killed by signal " + std::to_string(WTERMSIG(status)) + ": " + cmd, 128 + WTERMSIG(status));
    }
    const int code = WEXITSTATUS(status);
    if (code != 0) {
        throw PlugError(PlugError::Reason::exit_status, "plug exited with status " + std::to_string(code) + ": " + cmd,
                        code);
    }
}

}  // namespace hncg
