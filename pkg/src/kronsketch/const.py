#: Largest number of dense entries any materialization is allowed to produce.
DEFAULT_MATERIALIZE_CAP = 2 ** 24

#: Singular values below ``max(rows, cols) * sigma_max * DEFAULT_RANK_RTOL`` count as zero.
DEFAULT_RANK_RTOL = 1e-12

SKETCH_KINDS = (
    'gaussian',
    'kfjlt',
    'trp',
    'tensorsketch',
    'sampling',
)
STRUCTURED_KINDS = SKETCH_KINDS[1:]

DISTRIBUTIONS = (
    'normal',
    'sparse3',
    'spike',
)

LOG_BASES = ('e', '2', '10')

# 2**61 - 1, large enough that hash coefficients never collide for realistic mode sizes.
MERSENNE_PRIME = (1 << 61) - 1

CONFIG_KEYS = (
    'materialize_cap',
    'rank_rtol',
    'log_base',
    'force_colors',
    'stream',
)

CSV_SCHEMA_VERSION = 1
CSV_PREAMBLE = '# kronsketch-csv schema={}'.format(CSV_SCHEMA_VERSION)
CSV_COLUMNS = (
    'kind',
    'J',
    'trials',
    'mean',
    'std',
    'max',
    'seed',
    'wallclock_ms',
)
TRIAL_LOG_COLUMNS = (
    'kind',
    'J',
    'trial',
    'seed',
    'value',
)
LSQ_COLUMNS = (
    'kind',
    'J',
    'seed',
    'residual',
    'sketched_residual',
    'opt',
    'ratio',
    'sigma2_min',
    'perp_ratio',
)
