// Typed client for the three survey-service endpoints. The payload types
// mirror exactly what the server sends: no provenance field exists on the
// wire, so none can leak into the UI.

export type Choice = 'A' | 'B' | 'no_difference';

export interface Progress {
  answered: number;
  total: number;
}

export interface ItemPayload {
  item_id: string;
  text: string;
  dist_A: number[];
  dist_B: number[];
  labels: string[];
  progress: Progress;
}

export interface DonePayload {
  done: true;
  progress: Progress;
}

export type NextPayload = ItemPayload | DonePayload;

export function isDone(payload: NextPayload): payload is DonePayload {
  return 'done' in payload && payload.done === true;
}

export type SubmitResult = 'ok' | 'duplicate';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export async function fetchNext(base: string, participant: string): Promise<NextPayload> {
  const url = `${base}/api/bundle/next?participant=${encodeURIComponent(participant)}`;
  const response = await fetch(url);
  if (!response.ok) {
    throw new ApiError(response.status, await response.text());
  }
  return (await response.json()) as NextPayload;
}

export async function submitChoice(
  base: string,
  participant: string,
  itemId: string,
  choice: Choice,
): Promise<SubmitResult> {
  const response = await fetch(`${base}/api/response`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ participant, item_id: itemId, choice }),
  });
  if (response.status === 409) {
    // already answered (e.g. a retried request that did land): safe to advance
    return 'duplicate';
  }
  if (!response.ok) {
    throw new ApiError(response.status, await response.text());
  }
  return 'ok';
}
