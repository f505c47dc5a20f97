'''semrate: latent-dimension (semantic-rate) control on a single-server link

Each update is sent with a latent dimension N that sets both its service time
and its semantic error probability. The package simulates the queue, runs the
fixed-N and drift-plus-penalty controllers, and sweeps the control weight to
find the lowest delay or age that respects a long-term error cap.
'''
import logging

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = '0.1.0'
