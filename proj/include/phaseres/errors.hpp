#pragma once

#include <stdexcept>
#include <string>

namespace phaseres {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error { public: using Error::Error; };

/// Linear non-resonant response undefined (omega too close to omega0).
class SingularFrequency : public Error { public: using Error::Error; };

/// Damping too large for the linear frequency response to have a peak.
class OverdampedPeak : public Error { public: using Error::Error; };

class ZeroDamping : public Error { public: using Error::Error; };

/// Closed-form quadratic has no real root for the requested family.
class NoResonance : public Error { public: using Error::Error; };

/// Inner discriminant of a locus negative: no quadrature point at this frequency.
class BelowFoldPoint : public Error { public: using Error::Error; };

class UnsupportedFamily : public Error { public: using Error::Error; };

/// r0 approximation has a negative radicand.
class NotExist : public Error { public: using Error::Error; };

class SeedNotFound : public Error { public: using Error::Error; };

class NoConvergence : public Error { public: using Error::Error; };

class NonFinite : public Error { public: using Error::Error; };

class NotSettled : public Error { public: using Error::Error; };

}  // namespace phaseres
