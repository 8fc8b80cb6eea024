#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qadv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define QADV_DEFINE_ERROR(Name)          \
    class Name : public Error {          \
    public:                              \
        using Error::Error;              \
    }

QADV_DEFINE_ERROR(PreconditionError);
QADV_DEFINE_ERROR(DomainError);
QADV_DEFINE_ERROR(NotAClaw);
QADV_DEFINE_ERROR(NotInImage);
QADV_DEFINE_ERROR(TooLarge);
QADV_DEFINE_ERROR(InsufficientData);
QADV_DEFINE_ERROR(CollapsedState);
QADV_DEFINE_ERROR(DegenerateModel);
QADV_DEFINE_ERROR(MalformedCircuit);
QADV_DEFINE_ERROR(BudgetExceeded);
QADV_DEFINE_ERROR(NoCrossing);
QADV_DEFINE_ERROR(TransportError);
QADV_DEFINE_ERROR(ProtocolViolation);

#undef QADV_DEFINE_ERROR

class ExtractionFailed : public Error {
public:
    ExtractionFailed(const std::string& what, std::size_t queries)
        : Error(what), queries_used(queries) {}
    std::size_t queries_used;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), byte_offset(offset) {}
    std::size_t byte_offset;
};

}  // namespace qadv
