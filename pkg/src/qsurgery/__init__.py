"""Fast generalized surgery on CSS quantum LDPC codes.

Submodules build on each other roughly bottom-up:

- :mod:`qsurgery.f2` — bit-packed GF(2) vectors/matrices and elimination
- :mod:`qsurgery.homology` — chain complexes, (co)homology, systoles
- :mod:`qsurgery.csscode` — CSS codes with optional meta-checks
- :mod:`qsurgery.gadgets` — measurement gadgets (chain maps into a code)
- :mod:`qsurgery.surgery` — merged codes, surgery plans, distance audits
- :mod:`qsurgery.boost` — distance boosting by tensoring with a repetition
  complex
- :mod:`qsurgery.multicycle` — the multi-cycle code family and the worked
  42-qubit instance
- :mod:`qsurgery.stabsim` — stabilizer tableau simulator and the
  measurement protocol
- :mod:`qsurgery.decoder` — belief propagation + ordered-statistics decoding
- :mod:`qsurgery.montecarlo` — phenomenological-noise logical error rate
  experiments
- :mod:`qsurgery.formats` — text file formats for codes, complexes, results
- :mod:`qsurgery.cli` — the ``qsurgery`` command line tool
"""

__version__ = "0.1.0"
