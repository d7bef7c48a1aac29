#pragma once

#include <stdexcept>
#include <string>

namespace dnascreen {

enum class Err {
    // group / scalar
    InversionOfZero,
    EmptyHashInput,
    MalformedPoint,
    // secret sharing
    BadConfig,
    DuplicateIndex,
    EpochMismatch,
    InsufficientShares,
    DkgAborted,
    ReshareImpossible,
    DegreeReductionImpossible,
    // doprf
    ZeroBlind,
    NotInEvaluationSet,
    ShareCountMismatch,
    QuorumUnavailable,
    // sequences
    ParseError,
    FrameError,
    // db builder
    TooShort,
    StaleKey,
    // servers
    RateLimited,
    UnknownRound,
    InvalidCertificate,
    MalformedHash,
    EltInvalid,
    EltReplayed,
    VersionRegression,
    CorruptTable,
    DatabaseUnreachable,
    ServerUnreachable,
    // certificates / tokens
    RoleViolation,
    ExpiredIssuer,
    BrokenSignature,
    Expired,
    UnknownRoot,
    EmptyExemptions,
    InvalidOfficerChain,
    BindingMismatch,
    // harness
    ScenarioInvalid,
};

inline const char* err_name(Err e) {
    switch (e) {
        case Err::InversionOfZero: return "InversionOfZero";
        case Err::EmptyHashInput: return "EmptyHashInput";
        case Err::MalformedPoint: return "MalformedPoint";
        case Err::BadConfig: return "BadConfig";
        case Err::DuplicateIndex: return "DuplicateIndex";
        case Err::EpochMismatch: return "EpochMismatch";
        case Err::InsufficientShares: return "InsufficientShares";
        case Err::DkgAborted: return "DkgAborted";
        case Err::ReshareImpossible: return "ReshareImpossible";
        case Err::DegreeReductionImpossible: return "DegreeReductionImpossible";
        case Err::ZeroBlind: return "ZeroBlind";
        case Err::NotInEvaluationSet: return "NotInEvaluationSet";
        case Err::ShareCountMismatch: return "ShareCountMismatch";
        case Err::QuorumUnavailable: return "QuorumUnavailable";
        case Err::ParseError: return "ParseError";
        case Err::FrameError: return "FrameError";
        case Err::TooShort: return "TooShort";
        case Err::StaleKey: return "StaleKey";
        case Err::RateLimited: return "RateLimited";
        case Err::UnknownRound: return "UnknownRound";
        case Err::InvalidCertificate: return "InvalidCertificate";
        case Err::MalformedHash: return "MalformedHash";
        case Err::EltInvalid: return "EltInvalid";
        case Err::EltReplayed: return "EltReplayed";
        case Err::VersionRegression: return "VersionRegression";
        case Err::CorruptTable: return "CorruptTable";
        case Err::DatabaseUnreachable: return "DatabaseUnreachable";
        case Err::ServerUnreachable: return "ServerUnreachable";
        case Err::RoleViolation: return "RoleViolation";
        case Err::ExpiredIssuer: return "ExpiredIssuer";
        case Err::BrokenSignature: return "BrokenSignature";
        case Err::Expired: return "Expired";
        case Err::UnknownRoot: return "UnknownRoot";
        case Err::EmptyExemptions: return "EmptyExemptions";
        case Err::InvalidOfficerChain: return "InvalidOfficerChain";
        case Err::BindingMismatch: return "BindingMismatch";
        case Err::ScenarioInvalid: return "ScenarioInvalid";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& detail = "")
        : std::runtime_error(detail.empty() ? err_name(code)
                                            : std::string(err_name(code)) + ": " + detail),
          code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

inline Err err_from_name(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(Err::ScenarioInvalid); ++i) {
        auto e = static_cast<Err>(i);
        if (name == err_name(e)) return e;
    }
    throw std::runtime_error("unknown error name: " + name);
}

}  // namespace dnascreen
