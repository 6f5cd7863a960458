import { AspectInfo, EntityInfo, SummaryResponse } from './api';

// Pure HTML-string renderers so the view layer is testable without a
// DOM. Every sentence string passes through escapeHtml verbatim; the
// renderer never invents or rewrites text.

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

export function renderEntityList(
  entities: EntityInfo[],
  selected: string | null,
): string {
  const items = entities
    .map((entity) => {
      const cls = entity.entity_id === selected ? ' class="selected"' : '';
      return (
        `<li${cls}><button data-entity="${escapeHtml(entity.entity_id)}">` +
        `${escapeHtml(entity.entity_id)} (${entity.n_reviews} reviews)` +
        `</button></li>`
      );
    })
    .join('');
  return `<ul class="entities">${items}</ul>`;
}

export function renderAspectToggles(
  aspects: AspectInfo[],
  selection: ReadonlySet<string>,
): string {
  const boxes = aspects
    .map((aspect) => {
      const checked = selection.has(aspect.name) ? ' checked' : '';
      const seeds = escapeHtml(aspect.seeds.join(', '));
      return (
        `<label title="${seeds}">` +
        `<input type="checkbox" data-aspect="${escapeHtml(aspect.name)}"${checked}>` +
        `${escapeHtml(aspect.name)}</label>`
      );
    })
    .join('');
  return `<div class="toggles">${boxes}</div>`;
}

export function renderSummary(response: SummaryResponse): string {
  const heading = response.aspects.map(escapeHtml).join(', ');
  const items = response.sentences
    .map(
      (sentence) =>
        `<li data-sentence>` +
        `<span class="text">${escapeHtml(sentence.text)}</span>` +
        `<span class="provenance">${escapeHtml(sentence.review_id)}` +
        ` &middot; salience ${sentence.salience.toFixed(4)}</span>` +
        `</li>`,
    )
    .join('');
  return (
    `<h2>${escapeHtml(response.entity_id)}: ${heading}</h2>` +
    `<ol class="summary">${items}</ol>` +
    `<p class="meta">${response.token_count} tokens` +
    ` &middot; model ${escapeHtml(response.model_version)}</p>`
  );
}

export function renderMessage(message: string): string {
  return `<p class="message">${escapeHtml(message)}</p>`;
}

/** The sentence strings a rendered summary displays, in order. */
export function displayedSentences(html: string): string[] {
  const out: string[] = [];
  const pattern = /<span class="text">(.*?)<\/span>/g;
  let match;
  while ((match = pattern.exec(html)) !== null) {
    out.push(unescapeHtml(match[1]));
  }
  return out;
}

function unescapeHtml(text: string): string {
  return text
    .replace(/&#39;/g, "'")
    .replace(/&quot;/g, '"')
    .replace(/&gt;/g, '>')
    .replace(/&lt;/g, '<')
    .replace(/&amp;/g, '&');
}
