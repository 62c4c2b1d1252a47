"""pcwkit: photonic-crystal W1 waveguide emission modeling and TCSPC analysis.

Computes slow-light-enhanced spontaneous-emission rates and beta-factors of
quantum dots in W1 photonic-crystal waveguides from a 2D plane-wave band
structure, and fits time-resolved decay histograms with Poisson maximum
likelihood and reduced-chi^2 model selection.
"""

__version__ = "0.1.0"

from .errors import (EmptyCampaignError, EstimationError, FitFailureError,
                     NoGapError, NoGuidedModeError, NotCoupledError,
                     NumericalError, OutOfBandError, ParameterError, PcwError)
from .geometry import (CrystalGeometry, ReciprocalBasis, Supercell,
                       fourier_coefficient, make_bulk_cell, make_supercell,
                       make_w1_supercell)
from .pwe import (BandStructure, ModeField, PlaneWaveOperator, assemble_operator,
                  empty_lattice_reference, reconstruct_field, solve_bands)
from .dispersion import (GapWindow, WaveguideMode, band_edge, bulk_gap,
                         bulk_k_path, effective_mode_volume, extract_guided_mode,
                         group_velocity, invert_dispersion, w1_k_path)
from .emission import (EmissionParams, EmissionPoint, beta_bandwidth, beta_factor,
                       beta_from_measurement, decay_rate, decay_rate_spectrum,
                       scaled_frequency)
from .tcspc import (DecayFit, DecayHistogram, DecayModel, expected_counts, fit,
                    load_histogram, reduced_chi2, save_histogram, select_model,
                    synthesize)
from .pipeline import (CampaignReport, EmitterRecord, analyze_campaign,
                       beta_spectrum, classify, emit_report, gamma_tot_mean,
                       ingest, load_report, synth_campaign, theory_chain)
from .config import (CALIBRATED_N_EFF, PipelineConfig, default_config,
                     load_config)
