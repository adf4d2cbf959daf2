"""moonsieve: exact-arithmetic cohomology of prime-order symmetries of
graded modules whose twisted character series are genus-zero Hauptmoduln.

Subpackage map:

* :mod:`moonsieve.series`      truncated exact q- and (r,q)-series, 3-adic
  residues with precision tracking
* :mod:`moonsieve.kring`       rank-3 representation ring with exterior,
  symmetric, and Adams operations
* :mod:`moonsieve.modrep`      concrete integer representations, Tate
  cohomology, tensor/exterior/symmetric functors
* :mod:`moonsieve.haupt`       j-function, genus-zero seed table, extension
  of head character series by product identities
* :mod:`moonsieve.replicate`   twisted-denominator constraint engine over
  exact rationals and over 3-adic residues
* :mod:`moonsieve.sieve`       branch-and-prune search certifying odd-part
  cohomology vanishing
* :mod:`moonsieve.lattice`     E8, its exterior square, short-vector counts
* :mod:`moonsieve.supersplit`  free-superalgebra cohomology series and the
  ordinary/super split of twisted Hauptmoduln
* :mod:`moonsieve.cli`         command-line entry points
"""

__version__ = "0.1.0"
