#pragma once

#include "qadv/protocol/verifier.hpp"
#include "qadv/wire/frame.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace qadv::wire {

/// Newline-delimited byte stream. Both calls throw TransportError on EOF,
/// I/O failure or timeout.
class LineChannel {
public:
    virtual ~LineChannel() = default;
    virtual void send(const std::string& line) = 0;
    virtual std::string receive() = 0;
};

class FdChannel : public LineChannel {
public:
    /// `timeout_ms` bounds each wait for input; owned descriptors are closed
    /// on destruction.
    FdChannel(int in_fd, int out_fd, int timeout_ms = 30000, bool owns = false);
    ~FdChannel() override;
    FdChannel(const FdChannel&) = delete;
    FdChannel& operator=(const FdChannel&) = delete;

    void send(const std::string& line) override;
    std::string receive() override;
    void close_output();

protected:
    int in_, out_;
    int timeout_ms_;
    bool owns_;
    std::string buf_;
};

std::unique_ptr<FdChannel> stdio_channel(int timeout_ms = 30000);

/// `/bin/sh -c command` with its stdin and stdout wired to the channel.
class SpawnedChannel : public FdChannel {
public:
    SpawnedChannel(const std::string& command, int timeout_ms = 30000);
    ~SpawnedChannel() override;
    /// Closes our end and reaps the child; returns its exit status.
    int wait();

private:
    pid_t pid_ = -1;
    int status_ = -1;
};

/// Listens on `port` (0 picks one), reports the bound port through
/// `on_bound`, and accepts a single connection.
std::unique_ptr<FdChannel> tcp_accept(std::uint16_t port, int timeout_ms = 30000,
                                      const std::function<void(std::uint16_t)>& on_bound = {});
std::unique_ptr<FdChannel> tcp_connect(const std::string& host, std::uint16_t port, int timeout_ms = 30000);

/// Frames on a channel for one session: outgoing seq counts up from 0, and
/// incoming seq must strictly increase.
class FramedPeer {
public:
    FramedPeer(LineChannel& channel, std::string session);
    void send(const std::string& tag, const nlohmann::json& payload);
    void send(const protocol::RoundMessage& msg);
    /// Next frame; "error" frames from the peer become ProtocolViolation.
    WireFrame receive();
    protocol::RoundMessage receive_message(const std::string& expected_tag);
    void expect_control(const std::string& tag);

    const std::string& session() const { return session_; }
    void adopt_session(std::string s) { session_ = std::move(s); }

private:
    LineChannel& channel_;
    std::string session_;
    std::uint64_t out_seq_ = 0;
    std::optional<std::uint64_t> in_seq_;
};

/// The verifier's view of a prover in another process.
class RemoteProver : public protocol::ProverInterface {
public:
    explicit RemoteProver(FramedPeer& peer) : peer_(peer) {}
    void setup(const protocol::KeyMsg& key) override;
    protocol::ImageMsg round1() override;
    BitString answer_preimage() override;
    BitString round2(const BitString& r) override;
    bool round3(protocol::Basis m) override;
    void reset() override;

private:
    FramedPeer& peer_;
};

struct VerifyOptions {
    std::uint64_t trials = 1;
    std::uint64_t seed = 1;
    protocol::VerifierConfig verifier;
    bool keep_transcripts = false;
};

struct SessionResult {
    protocol::ScoreReport report;
    std::vector<protocol::Transcript> transcripts;
};

std::string session_id(std::uint64_t seed);

/// Runs `trials` iterations against whatever answers on the channel.
SessionResult serve_verifier(LineChannel& channel, const tcf::TcfKey& secret_key, const VerifyOptions& options);
/// Same loop with the prover in process.
SessionResult run_local(protocol::ProverInterface& prover, const tcf::TcfKey& secret_key, const VerifyOptions& options);
/// Answers verifier frames until "end". Failures are reported to the peer
/// with an "error" frame before being rethrown.
void run_prover(LineChannel& channel, protocol::ProverInterface& prover);

}  // namespace qadv::wire
