"""
Simulation and verification lab for r-round sparse set disjointness protocols
and the grid isoperimetry machinery behind the exists-equal lower bound.

    grid            points and subsets of [t]^n, match counts, Hamming balls, codecs
    downshift       down-compression operators, box witnesses, generalized perimeter
                    and the exhaustive verifiers built on them
    channel         two-party channel with shared randomness and exact bit accounting
    disjointness    the r-round sparse disjointness protocol, its parameter schedule,
                    the Hastad-Wigderson and hashing baselines, the exists-equal reduction
    embedding       the exists-equal embedding process and its Monte Carlo estimators
    harness         command line front end, reports, sweeps and golden transcripts

All logarithms are base 2 unless a name says otherwise.
"""
