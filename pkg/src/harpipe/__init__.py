"""harpipe: action recognition from grayscale frame sequences via good-feature
tracking, sparse optical-flow descriptors, and an RPROP-trained MLP."""

__version__ = "0.1.0"
