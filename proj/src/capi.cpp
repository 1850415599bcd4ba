#include "cryptoherm/cryptoherm.h"

#include <exception>
#include <new>
#include <string>

#include "cryptoherm/experiment.hpp"
#include "cryptoherm/metric.hpp"

using namespace cryptoherm;

struct chq_matrix {
  ComplexMatrix m;
};

struct chq_experiment {
  experiment::ExperimentConfig config;
};

struct chq_result {
  experiment::ResultRecord record;
  experiment::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

template <class F>
int guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return CHQ_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CHQ_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CHQ_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return CHQ_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* chq_version(void) { return experiment::tool_version(); }

const char* chq_status_name(int status) {
  if (status == CHQ_OK) return "Ok";
  if (status == CHQ_INTERNAL) return "Internal";
  if (status >= 1 && status <= 21) return error_code_name(static_cast<ErrorCode>(status)).data();
  return "Unknown";
}

const char* chq_last_error(void) { return last_error.c_str(); }

int chq_matrix_create(size_t rows, size_t cols, chq_matrix** out) {
  return guarded([&] {
    need(out, "out");
    require(rows > 0 && cols > 0, "matrix dimensions must be positive");
    *out = new chq_matrix{ComplexMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols))};
  });
}

void chq_matrix_destroy(chq_matrix* m) { delete m; }

size_t chq_matrix_rows(const chq_matrix* m) { return m ? static_cast<size_t>(m->m.rows()) : 0; }
size_t chq_matrix_cols(const chq_matrix* m) { return m ? static_cast<size_t>(m->m.cols()) : 0; }

int chq_matrix_set(chq_matrix* m, size_t row, size_t col, double re, double im) {
  return guarded([&] {
    need(m, "matrix");
    require(row < chq_matrix_rows(m) && col < chq_matrix_cols(m), "matrix index out of range");
    m->m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = Complex(re, im);
  });
}

int chq_matrix_get(const chq_matrix* m, size_t row, size_t col, double* re, double* im) {
  return guarded([&] {
    need(m, "matrix");
    require(row < chq_matrix_rows(m) && col < chq_matrix_cols(m), "matrix index out of range");
    const Complex v = m->m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    if (re) *re = v.real();
    if (im) *im = v.imag();
  });
}

int chq_eig(const chq_matrix* m, double tol, double* re, double* im) {
  return guarded([&] {
    need(m, "matrix");
    need(re, "re");
    need(im, "im");
    const linalg::Spectrum s = linalg::eig(m->m, tol);
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      re[i] = s.values(i).real();
      im[i] = s.values(i).imag();
    }
  });
}

int chq_build_metric(const chq_matrix* h, const double* kappa, size_t kappa_len, double tol, chq_matrix** theta,
                     double* residual) {
  return guarded([&] {
    need(h, "h");
    need(theta, "theta");
    metric::MetricOperator m = kappa ? metric::build_metric(h->m, std::vector<double>(kappa, kappa + kappa_len), tol)
                                     : metric::build_metric(h->m, tol);
    if (residual) *residual = m.quasi_residual;
    *theta = new chq_matrix{std::move(m.theta)};
  });
}

int chq_hermitize(const chq_matrix* h, const chq_matrix* theta, double tol, chq_matrix** out) {
  return guarded([&] {
    need(h, "h");
    need(theta, "theta");
    need(out, "out");
    const metric::MetricOperator m = metric::certify_metric(h->m, theta->m, tol);
    const metric::DysonMap d = metric::dyson_from_metric(m);
    *out = new chq_matrix{metric::hermitize(h->m, d, tol)};
  });
}

int chq_experiment_load(const char* path, chq_experiment** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new chq_experiment{experiment::load_config(path)};
  });
}

int chq_experiment_parse(const char* text, chq_experiment** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new chq_experiment{experiment::parse_config(text)};
  });
}

void chq_experiment_destroy(chq_experiment* e) { delete e; }

const char* chq_experiment_id(const chq_experiment* e) { return e ? e->config.id.c_str() : ""; }

int chq_experiment_run(const chq_experiment* e, chq_result** out) {
  return guarded([&] {
    need(e, "experiment");
    need(out, "out");
    *out = new chq_result{experiment::run_experiment(e->config), e->config};
  });
}

void chq_result_destroy(chq_result* r) { delete r; }

int chq_result_passed(const chq_result* r) { return r && r->record.all_passed() ? 1 : 0; }

size_t chq_result_certificate_count(const chq_result* r) { return r ? r->record.certificates.size() : 0; }

int chq_result_certificate(const chq_result* r, size_t index, const char** name, double* value,
                           const char** relation, double* tolerance, int* passed) {
  return guarded([&] {
    need(r, "result");
    require(index < r->record.certificates.size(), "certificate index out of range");
    const auto& c = r->record.certificates[index];
    if (name) *name = c.name.c_str();
    if (value) *value = c.value;
    if (relation) *relation = c.relation.c_str();
    if (tolerance) *tolerance = c.tolerance;
    if (passed) *passed = c.passed ? 1 : 0;
  });
}

int chq_result_write(const chq_result* r, const char* out_dir, int format) {
  return guarded([&] {
    need(r, "result");
    need(out_dir, "out_dir");
    experiment::Format f = r->config.format;
    if (format == CHQ_FORMAT_CSV) f = experiment::Format::Csv;
    else if (format == CHQ_FORMAT_JSON) f = experiment::Format::Json;
    else require(format == CHQ_FORMAT_CONFIG, "unknown format code");
    experiment::emit_results(r->record, r->config, out_dir, f);
  });
}

size_t chq_model_count(void) { return experiment::model_registry().size(); }

const char* chq_model_label(size_t index) {
  const auto& reg = experiment::model_registry();
  return index < reg.size() ? reg[index].label.c_str() : nullptr;
}

const char* chq_model_description(size_t index) {
  const auto& reg = experiment::model_registry();
  return index < reg.size() ? reg[index].description.c_str() : nullptr;
}

}  // extern "C"
