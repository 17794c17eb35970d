// Pure timeline geometry: everything is a fraction of the video duration,
// so rendering at any pixel width keeps events proportionally placed.

export interface BlockPosition {
  /** left edge as a fraction of the timeline width, 0..1 */
  left: number;
  /** width as a fraction of the timeline width, 0..1 */
  width: number;
}

export const BOUNDARY_GRID_S = 0.1;

export function positionFor(startS: number, endS: number, durationS: number): BlockPosition {
  if (durationS <= 0) throw new Error('duration must be positive');
  return { left: startS / durationS, width: (endS - startS) / durationS };
}

/** Boundary edits snap to the 0.1 s grid matching manifest precision. */
export function snapToGrid(timeS: number, gridS: number = BOUNDARY_GRID_S): number {
  // multiply by the integer inverse: dividing by 0.1 drops exact halves
  const inverse = Math.round(1 / gridS);
  return Math.round(timeS * inverse) / inverse;
}

export interface LaneBlock extends BlockPosition {
  eventId: string;
  label: string;
  startS: number;
  endS: number;
  state?: string;
  selected?: boolean;
  /** constituent audio spans positioned relative to this block (omni lane) */
  contained?: BlockPosition[];
}

export interface LaneModel {
  name: 'visual' | 'audio' | 'omni';
  blocks: LaneBlock[];
}

/** Position of a child span relative to a parent block, 0..1 of the parent. */
export function containedPosition(
  childStartS: number,
  childEndS: number,
  parentStartS: number,
  parentEndS: number,
): BlockPosition {
  const span = parentEndS - parentStartS;
  if (span <= 0) throw new Error('parent span must be positive');
  return {
    left: (childStartS - parentStartS) / span,
    width: (childEndS - childStartS) / span,
  };
}
