"""Case store and dataset manifests."""
