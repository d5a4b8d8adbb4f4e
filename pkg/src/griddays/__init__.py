"""Representative-day selection and joint power/gas expansion planning.

The package is organized around the stages of the pipeline:

* :mod:`griddays.graphsys` -- network topologies, spectral operators and
  multi-resolution day signals.
* :mod:`griddays.games` -- the graph-convolutional autoencoder that embeds
  joint power/gas days into a low-dimensional latent space.
* :mod:`griddays.repdays` -- k-medoids selection of weighted representative
  days from embeddings or raw data.
* :mod:`griddays.gtep` -- the joint power/natural-gas capacity-expansion
  MILP and its two-step full-horizon evaluation.
* :mod:`griddays.solver` -- bundled sparse LP (revised simplex) and
  branch-and-bound MILP solver with MPS import/export.
* :mod:`griddays.cli` -- command line orchestration of the full pipeline.
"""

__version__ = "0.1.0"
