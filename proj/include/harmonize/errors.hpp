#pragma once

#include <stdexcept>
#include <string>

namespace harmonize {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape disagreement within one computation (matmul operands, image vs mask, ...).
class dimension_error : public error {
public:
    using error::error;
};

// Latent geometry or context dimension disagreement between the two denoising processes.
class dual_shape_error : public error {
public:
    using error::error;
};

// A composition mode was asked to operate on operands it does not admit.
class mode_error : public error {
public:
    using error::error;
};

class empty_input_error : public error {
public:
    using error::error;
};

// Mask is not binary or does not match the latent length.
class mask_error : public error {
public:
    using error::error;
};

// Scalar parameter outside its admissible range.
class parameter_error : public error {
public:
    using error::error;
};

// A derivation needed attention records that were never produced.
class missing_record_error : public error {
public:
    using error::error;
};

// Invalid run configuration (unknown fields, bad layer ids, ...).
class config_error : public error {
public:
    using error::error;
};

// Timestep index outside [1, T], or a lockstep tag mismatch between processes.
class step_error : public error {
public:
    using error::error;
};

class report_error : public error {
public:
    using error::error;
};

}  // namespace harmonize
