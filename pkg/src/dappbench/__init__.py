"""dappbench: a self-hostable smart-contract deployment and test workbench."""

__version__ = "0.1.0"
