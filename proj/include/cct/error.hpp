#pragma once

#include <stdexcept>
#include <string>

namespace cct {

enum class ErrorKind {
    DomainMismatch,    // world/interpretation does not cover a referenced event
    UnknownEvent,      // event name not in the knowledge base
    NotATree,          // adjacency not connected or contains a cycle
    MissingReverse,    // edge lacks one of its two constraints
    DuplicateEdge,     // more than one constraint pair on the same event pair
    ZeroLowerBound,    // u1 = 0 or v1 = 0 on a tree edge
    BadInterval,       // l > u, or endpoint outside [0,1]
    BadEvent,          // malformed event (top where not allowed, empty, self-edge)
    QueryOverlap,      // premise and conclusion share a basic event
    NoCommonNode,      // some pair of premise/conclusion paths is disjoint
    Classification,    // operation called on the wrong query class
    Precondition,      // other violated precondition (alpha1 = 0, needless split, ...)
    CapExceeded,       // world count above the configured cap
    MalformedLp,
    Parse,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace cct
