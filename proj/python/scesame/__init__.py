"""Zero-shot edge detection from segmentation masks.

Mask sets come from binary arrays (``mask_set``) or mask JSON files
(``load_masks``). ``detect_edges`` runs box NMS, top mask selection,
spectral mask ensembling, boundary zero padding, blur and edge NMS, and
``evaluate`` scores soft edge maps with the BSDS protocol.
"""

from ._scesame import (
    MaskSet,
    ScesameError,
    adjusted_rand_index,
    aggregate_normalize,
    boundary_zero_padding,
    box_nms,
    cluster_count,
    cluster_demo,
    detect_edges,
    edge_nms,
    evaluate,
    gaussian_blur,
    gen_circles,
    kmeans,
    knn_affinity,
    laplacian,
    load_masks,
    mask_set,
    prf_at_threshold,
    read_ground_truth,
    read_pfm,
    rle_decode,
    rle_encode,
    save_masks,
    scesame_affinity,
    spectral_cluster,
    synthetic_scene,
    tms_keep_count,
    top_mask_selection,
    write_pfm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
