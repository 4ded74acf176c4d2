// Annotator guidance shown in the collapsible panel: what each topic means
// and how to choose tweets. Shown expanded the first time a session opens.

export const TOPIC_DESCRIPTIONS: Record<string, string> = {
  AffectedPopulation:
    "People harmed or unaccounted for: deaths, injuries, missing or found persons, and counts of those affected.",
  EarlyWarning:
    "Alerts, watches and advisories issued for the event, including aftershock or follow-up warnings.",
  EmergencyExercises:
    "Preparedness activity: drills, readiness exercises, and advice to get supplies or plans in order.",
  EmotionalDistress:
    "First-person fear, shock, grief or anxiety about the event.",
  HumanitarianEvent:
    "Activity of relief agencies and organizations: deployments, missions, coordination of the response.",
  Impact:
    "Aftermath beyond the initial hit: cleanup, rebuilding, displacement, closures and economic disruption.",
  InfrastructureDamage:
    "Damage to built things: buildings, homes, roads, bridges, utilities and vehicles.",
  VolunteeringSupport:
    "Help being given: rescues, volunteering, donations, distribution of aid and services.",
  Prayer:
    "Prayers, condolences and messages of moral support.",
  SupplyNeeds:
    "Urgent requests for food, water, clothing, money, medicine or blood.",
};

export const INSTRUCTIONS: string[] = [
  "Read about the disaster event from trusted external sources before you start.",
  "Review each topic's description (below) and skim its example tweets so the topics are clear.",
  "Pick tweets on your own judgment: weigh how important the topic is for this event and how important the tweet is within its topic. Leaving a topic empty is fine if you judge it unimportant.",
];
