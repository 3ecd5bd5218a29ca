"""JSON schemas for the CLI's machine-readable outputs."""

PRIMES_SCHEMA = {
    "type": "object",
    "required": ["v", "n", "mu", "n_beta", "primes"],
    "properties": {
        "v": {"type": "integer", "minimum": 2},
        "n": {"type": "integer", "minimum": 2},
        "mu": {"type": "integer", "minimum": 2},
        "n_beta": {"type": "integer", "minimum": 1},
        "primes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["q", "pot", "epsilon_bits"],
                "properties": {
                    "q": {"type": "integer", "minimum": 3},
                    "pot": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "items": {"type": "integer"},
                            "minItems": 2,
                            "maxItems": 2,
                        },
                    },
                    "epsilon_bits": {"type": "integer", "minimum": 1},
                },
            },
        },
    },
}

CYCLE_REPORT_SCHEMA = {
    "type": "object",
    "required": ["n", "t_pipe", "latency", "bpp", "blocks", "total",
                 "utilization"],
    "properties": {
        "n": {"type": "integer", "minimum": 4},
        "t_pipe": {"type": "integer", "minimum": 0},
        "latency": {"type": "integer", "minimum": 0},
        "bpp": {"type": "integer", "minimum": 1},
        "blocks": {"type": "integer", "minimum": 0},
        "total": {"type": "integer", "minimum": 0},
        "utilization": {
            "type": "object",
            "additionalProperties": {"type": "number",
                                     "minimum": 0.0, "maximum": 1.0},
        },
    },
}

SCHEDULE_SCHEMA = {
    "type": "object",
    "required": ["kind", "m", "orders", "dsd_sizes"],
    "properties": {
        "kind": {"enum": ["ntt", "intt"]},
        "m": {"type": "integer", "minimum": 2},
        "orders": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer"}},
        },
        "dsd_sizes": {"type": "array", "items": {"type": "integer"}},
    },
}

TABLE3_SCHEMA = {
    "type": "object",
    "required": ["n_beta", "rows"],
    "properties": {
        "n_beta": {"type": "integer"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t", "v", "mu", "pot", "n", "epsilon_bits",
                             "count", "published", "match"],
            },
        },
    },
}

BENCH_SCHEMA = {
    "type": "object",
    "required": ["seed", "rows"],
    "properties": {
        "seed": {"type": "integer"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "t", "v", "seconds_per_multiply",
                             "verified", "digest"],
            },
        },
    },
}
