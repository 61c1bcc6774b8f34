//! The bundled synthetic corpus: thirty template-expanded scenarios with
//! hand-written seeds, stratified 10/10/10 across axes and 5 per domain,
//! with 18 defensive personas and all four difficulty bands represented.
//!
//! Everything is generated in code so the checked-in corpus files can be
//! verified byte-for-byte against this builder.

use crate::card::{
    AxisPriorities, CurrentSituation, EmpathyNeeds, EmpathyThreshold, PastExperiences, PersonaCard,
    PriorityLevel, RoleInfo, RoleTraits, Story,
};
use crate::scenario::{
    BandingParams, Mechanism, MechanismKind, PersonaType, Scenario, TaggedLabel, SCENARIO_FORMAT,
};
use epm_core::{AxisId, IedrAssessment, IedrIndicator, IndicatorId};

struct Seed {
    n: u32,
    name: &'static str,
    gender: &'static str,
    age: u32,
    domain: &'static str,
    axis: AxisId,
    kind: MechanismKind,
    ptype: PersonaType,
    /// Uniform indicator level per axis: (cognitive, affective, proactive).
    levels: (u8, u8, u8),
    topic: &'static str,
    vent: &'static str,
    wall: &'static str,
    spark: &'static str,
}

use AxisId::{Affective as A, Cognitive as C, Proactive as P};
use MechanismKind::{Challenging as Ch, Routine as Ro};
use PersonaType::{Defensive as De, Receptive as Re};

const SEEDS: [Seed; 30] = [
    // values_beliefs
    Seed {
        n: 1, name: "Corin Abeyta", gender: "male", age: 41, domain: "values_beliefs",
        axis: C, kind: Ro, ptype: De, levels: (3, 1, 1),
        topic: "leaving the congregation he once led music for",
        vent: "Twenty years of Sundays and I can no longer tell which parts I believed and which parts I performed.",
        wall: "Quoting scripture at him ends the talk; so does congratulating him for leaving.",
        spark: "His daughter asked why they stopped going and he had no answer that felt honest.",
    },
    Seed {
        n: 2, name: "Yusra Halim", gender: "female", age: 27, domain: "values_beliefs",
        axis: A, kind: Ch, ptype: De, levels: (1, 3, 2),
        topic: "voting against her family's politics for the first time",
        vent: "I did the thing I believe in and I have felt sick since, like I stole something from people who fed me.",
        wall: "Do not tell her the family will come around; she has evidence they will not.",
        spark: "Her uncle saw the ballot photo a cousin leaked into the family group chat.",
    },
    Seed {
        n: 3, name: "Dmitri Sokolov", gender: "male", age: 52, domain: "values_beliefs",
        axis: P, kind: Ro, ptype: De, levels: (1, 2, 3),
        topic: "the ethics complaint he keeps not filing against his mentor",
        vent: "I have the draft, the dates, the receipts. I open the portal every Friday and every Friday the timing is wrong again.",
        wall: "Calling it cowardice, even gently, gets a lecture on due process and then silence.",
        spark: "A younger colleague asked him point blank whether the rumors were true.",
    },
    Seed {
        n: 4, name: "Anneliese Brandt", gender: "female", age: 33, domain: "values_beliefs",
        axis: C, kind: Ch, ptype: Re, levels: (3, 2, 2),
        topic: "losing her pacifism after the break-in",
        vent: "I wrote essays about nonviolence and now I price baseball bats at two in the morning. I do not recognize the person doing the pricing.",
        wall: "She does not want to be told which of the two selves is the real one.",
        spark: "She caught herself screaming at a stranger who tried the gate latch.",
    },
    Seed {
        n: 5, name: "Tomas Rietveld", gender: "male", age: 24, domain: "values_beliefs",
        axis: A, kind: Ro, ptype: Re, levels: (1, 3, 1),
        topic: "grief that his faith did not survive his brother's funeral",
        vent: "Everyone at the service had somewhere to put it. I stood there holding mine with no shelf left.",
        wall: "He asks that nobody offer him new shelves.",
        spark: "The first anniversary is next month and his mother asked him to read a psalm.",
    },
    // health
    Seed {
        n: 6, name: "Imogen Clarke", gender: "female", age: 38, domain: "health",
        axis: P, kind: Ro, ptype: De, levels: (2, 2, 3),
        topic: "the physical therapy plan she has quietly stopped doing",
        vent: "Every exercise is a reminder the knee will never be the old knee. Skipping feels like the only decision that is still mine.",
        wall: "Progress trackers and accountability offers make her close the laptop.",
        spark: "Her surgeon's office called about the missed six-month review.",
    },
    Seed {
        n: 7, name: "Rafael Ibarra", gender: "male", age: 45, domain: "health",
        axis: C, kind: Ch, ptype: De, levels: (3, 2, 1),
        topic: "a diagnosis that explains his whole childhood too late",
        vent: "Forty years of being called lazy, and now a form says it was never a character flaw. I do not know where to file the old verdicts.",
        wall: "Relief narratives, the 'at least you know now' kind, feel like theft to him.",
        spark: "His mother cried on the phone and said she wished she had known, and he hung up.",
    },
    Seed {
        n: 8, name: "Signe Dahl", gender: "female", age: 29, domain: "health",
        axis: A, kind: Ro, ptype: De, levels: (2, 3, 3),
        topic: "panic attacks she hides from the climbing team",
        vent: "On the wall I am the calm one. In the car before practice I sit with the engine running and count my own pulse like it owes me money.",
        wall: "If anyone suggests she quit climbing, she will leave the conversation and possibly the team.",
        spark: "She froze on an easy route and blamed a shoulder she never injured.",
    },
    Seed {
        n: 9, name: "Bruno Carvalho", gender: "male", age: 61, domain: "health",
        axis: P, kind: Ch, ptype: Re, levels: (1, 1, 3),
        topic: "the cardiac rehab program he calls a waiting room",
        vent: "They want me pedaling a stationary bike between two men discussing their wills. I built bridges. I cannot start being a patient.",
        wall: "He does not respond to fear-based appeals about statistics.",
        spark: "His granddaughter asked if he would walk her down the aisle in two years and he changed the subject.",
    },
    Seed {
        n: 10, name: "Edith Varga", gender: "female", age: 56, domain: "health",
        axis: C, kind: Ro, ptype: Re, levels: (3, 1, 2),
        topic: "conflicting specialist advice she cannot reconcile",
        vent: "One doctor says move more, one says rest the joint, the forum says both are wrong. Every choice now feels like picking which expert to betray.",
        wall: "She does not want another article, however good.",
        spark: "The pharmacy flagged an interaction neither doctor had mentioned.",
    },
    // daily_life
    Seed {
        n: 11, name: "Priya Raghunathan", gender: "female", age: 31, domain: "daily_life",
        axis: A, kind: Ro, ptype: De, levels: (1, 3, 1),
        topic: "crying in the stairwell over a broken dishwasher",
        vent: "It was the dishwasher, then it was everything. I stood in the stairwell so the flat would not hear me, and even that felt like a scheduling decision.",
        wall: "Logistics help, rosters, apps, clever hacks, reads to her as being managed.",
        spark: "Her flatmate left a cheerful note about splitting the repair cost.",
    },
    Seed {
        n: 12, name: "Marek Lis", gender: "male", age: 26, domain: "daily_life",
        axis: P, kind: Ch, ptype: De, levels: (2, 3, 3),
        topic: "an inbox he has not opened in nineteen days",
        vent: "There is a number on the icon and it grows like mold. Every plan to deal with it starts tomorrow at nine and dies by ten past.",
        wall: "Productivity systems have all been tried and worn out; suggesting one more is how you lose him.",
        spark: "A paper letter version of one of the emails arrived, which means someone noticed.",
    },
    Seed {
        n: 13, name: "Halima Abdi", gender: "female", age: 40, domain: "daily_life",
        axis: C, kind: Ro, ptype: De, levels: (3, 1, 1),
        topic: "a full calendar that no longer makes sense to her",
        vent: "I can account for every hour and still cannot explain what my weeks are for. The calendar is full and the question is not.",
        wall: "She is not looking for a hobby recommendation.",
        spark: "She finished a whole Saturday and could not remember one thing she had chosen.",
    },
    Seed {
        n: 14, name: "Owen Pritchard", gender: "male", age: 35, domain: "daily_life",
        axis: A, kind: Ch, ptype: Re, levels: (2, 3, 2),
        topic: "the noise dispute with the upstairs neighbor",
        vent: "I flinch at my own ceiling now. I rehearse confrontations in the shower and lose those too. It is a floor, and it has colonized my whole evening.",
        wall: "Jokes about it being just a neighbor land badly; it stopped being funny in March.",
        spark: "The landlord copied both parties on a warning that read like it was his fault.",
    },
    Seed {
        n: 15, name: "Noor Haddad", gender: "female", age: 23, domain: "daily_life",
        axis: P, kind: Ro, ptype: Re, levels: (1, 1, 3),
        topic: "a driving test she keeps not booking",
        vent: "Everyone my age drives. The booking page knows me by now. I get to the calendar screen and suddenly the kitchen needs cleaning.",
        wall: "She has heard every version of 'just book it'.",
        spark: "Her new job posted a rota that assumes she can cover the depot run.",
    },
    // interpersonal
    Seed {
        n: 16, name: "Gabriel Mwangi", gender: "male", age: 48, domain: "interpersonal",
        axis: C, kind: Ro, ptype: De, levels: (3, 2, 2),
        topic: "a twenty-year friendship that ended without an argument",
        vent: "There was no fight. He just answered slower every year until the silence was the answer. I keep auditing two decades for the sentence I must have said.",
        wall: "Do not suggest closure texts; he has four in drafts.",
        spark: "A mutual friend mentioned the man was at a barbecue ten minutes from his house.",
    },
    Seed {
        n: 17, name: "Lena Oberst", gender: "female", age: 30, domain: "interpersonal",
        axis: A, kind: Ch, ptype: De, levels: (1, 3, 3),
        topic: "being the one who always texts first",
        vent: "I ran the experiment. I stopped initiating and the group chat healed over me like skin over a splinter. Nobody noticed the experiment because nobody noticed me.",
        wall: "Reassurance about how busy people are will end the conversation.",
        spark: "Her birthday passed with two messages, one automated.",
    },
    Seed {
        n: 18, name: "Arne Fossum", gender: "male", age: 59, domain: "interpersonal",
        axis: P, kind: Ro, ptype: De, levels: (2, 1, 3),
        topic: "an estranged son whose number he still knows by heart",
        vent: "I compose the call while shaving. Some mornings I get as far as holding the phone. Eleven years of almosts and I cannot start the twelfth differently.",
        wall: "He will not be told what the son is probably feeling.",
        spark: "His son's company newsletter, which he quietly reads, announced a new baby.",
    },
    Seed {
        n: 19, name: "Mireille Fontaine", gender: "female", age: 22, domain: "interpersonal",
        axis: C, kind: Ch, ptype: Re, levels: (3, 1, 1),
        topic: "a best friend who became her manager",
        vent: "Tuesday she rates my performance, Friday we split fries. I cannot work out which sentences are friendship and which are feedback, so I now say almost nothing in both.",
        wall: "She does not want to be told to quit or to confront; she wants the tangle named.",
        spark: "Her friend-manager apologized for the review with a heart emoji.",
    },
    Seed {
        n: 20, name: "Jonas Keller", gender: "male", age: 28, domain: "interpersonal",
        axis: A, kind: Ro, ptype: Re, levels: (2, 3, 1),
        topic: "loneliness inside a loud shared house",
        vent: "Five housemates, a group calendar, pasta nights. I am surrounded and unmet. Saying this aloud feels like ingratitude, so I say it to the extractor fan.",
        wall: "Do not suggest he organize yet another house event.",
        spark: "He skipped pasta night and nobody asked where he was.",
    },
    // career_achievement
    Seed {
        n: 21, name: "Sachiko Tan", gender: "female", age: 37, domain: "career_achievement",
        axis: P, kind: Ro, ptype: De, levels: (1, 2, 3),
        topic: "a finished novel manuscript she will not submit",
        vent: "It is done. It has been done for a year. Querying agents means finding out whether the decade was worth anything, and I keep choosing not to know.",
        wall: "Deadlines imposed by others make her hide the file deeper.",
        spark: "A writing-group peer with, she believes, a weaker draft announced a book deal.",
    },
    Seed {
        n: 22, name: "Viktor Eriksen", gender: "male", age: 44, domain: "career_achievement",
        axis: C, kind: Ch, ptype: De, levels: (3, 2, 2),
        topic: "being promoted out of the work he was good at",
        vent: "They took the tools out of my hands and gave me a calendar of other people's problems. I was a craftsman; now I am a forwarding address, and I agreed to it.",
        wall: "Career-ladder framing, the 'this is growth' kind, is exactly the language he cannot hear.",
        spark: "His old team shipped the project he designed and thanked his replacement by name.",
    },
    Seed {
        n: 23, name: "Fatou N'Diaye", gender: "female", age: 26, domain: "career_achievement",
        axis: A, kind: Ro, ptype: De, levels: (1, 3, 2),
        topic: "dread before her first conference talk",
        vent: "The acceptance email sits in my inbox like a clerical error. I practice the talk to the mirror and watch the mirror stop believing me around slide four.",
        wall: "Credential pep talks bounce off; they do not reach the four a.m. version of her.",
        spark: "The program went live with her name spelled perfectly, which made it real.",
    },
    Seed {
        n: 24, name: "Hugo Lindqvist", gender: "male", age: 50, domain: "career_achievement",
        axis: P, kind: Ch, ptype: Re, levels: (2, 3, 3),
        topic: "restarting after his company of twelve years folded",
        vent: "The liquidation email was four paragraphs. Twelve years, four paragraphs. Every job listing I open, I close; applying feels like agreeing it is over.",
        wall: "He cannot hear silver-lining talk about fresh starts yet.",
        spark: "A former employee asked him for a reference and he wept after sending it.",
    },
    Seed {
        n: 25, name: "Amara Osei", gender: "female", age: 21, domain: "career_achievement",
        axis: C, kind: Ro, ptype: Re, levels: (3, 1, 1),
        topic: "choosing between the scholarship and the apprenticeship",
        vent: "Everyone hands me the same coin with different faces. Security, passion, family, self. I can argue both sides so well I no longer know which voice is mine.",
        wall: "She is not asking anyone to decide for her.",
        spark: "Both acceptance letters now sit on the same corkboard with the same deadline.",
    },
    // family_origins
    Seed {
        n: 26, name: "Rosa Delgado", gender: "female", age: 34, domain: "family_origins",
        axis: A, kind: Ro, ptype: De, levels: (2, 3, 2),
        topic: "becoming a mother while furious at her own",
        vent: "The baby naps on my chest and I catch myself rehearsing apologies I never got. I am someone's soft place now and nobody ever was mine.",
        wall: "Do not defend her mother's generation to her.",
        spark: "Her mother mailed a box of baby clothes with a note that said 'you turned out fine'.",
    },
    Seed {
        n: 27, name: "Elias Navarro", gender: "male", age: 39, domain: "family_origins",
        axis: P, kind: Ch, ptype: De, levels: (1, 2, 3),
        topic: "the family house he inherited and cannot enter",
        vent: "I own a door I have not opened in two years. The lawyer calls it an asset. I pay taxes on rooms I argue with in my sleep.",
        wall: "Market advice about selling gets him listing reasons the timing is wrong, forever.",
        spark: "The municipality sent a maintenance notice about the collapsing back fence.",
    },
    Seed {
        n: 28, name: "Greta Lindholm", gender: "female", age: 63, domain: "family_origins",
        axis: C, kind: Ro, ptype: De, levels: (3, 2, 1),
        topic: "learning at sixty-three that she was adopted",
        vent: "Every childhood photo is the same photo and also a different photo now. I keep re-reading my own biography looking for the watermark.",
        wall: "She does not want ancestry-kit enthusiasm or reunion fantasies.",
        spark: "A cousin's genealogy account flagged the inconsistency and the family stopped denying it.",
    },
    Seed {
        n: 29, name: "Daniyar Seitkali", gender: "male", age: 25, domain: "family_origins",
        axis: A, kind: Ch, ptype: Re, levels: (1, 3, 1),
        topic: "being the first to leave the village and the first blamed",
        vent: "At home I am the one who left. Here I am the one from there. Both rooms go quiet differently when I enter, and I miss a room that does not exist.",
        wall: "Do not romanticize roots or the city to him.",
        spark: "His father asked, on speakerphone in front of guests, when he would stop pretending.",
    },
    Seed {
        n: 30, name: "Ines Barros", gender: "female", age: 47, domain: "family_origins",
        axis: P, kind: Ro, ptype: Re, levels: (3, 2, 3),
        topic: "caring for the father who never cared for her",
        vent: "I fill his pillbox on Sundays. He calls me by my sister's name and I still go back Wednesdays. Leaving feels impossible; staying feels like volunteering for the old silence.",
        wall: "Nobody gets to call her a saint and nobody gets to call her a doormat.",
        spark: "The care assessor suggested she move in with him to save costs.",
    },
];

fn first_name(name: &str) -> &str {
    name.split_whitespace().next().unwrap_or(name)
}

fn axis_drive(axis: AxisId) -> &'static str {
    match axis {
        AxisId::Cognitive => {
            "a need for the story to add up; uncertainty reads to them as personal failure"
        }
        AxisId::Affective => {
            "feelings that arrive at full volume and get paid for later, in private"
        }
        AxisId::Proactive => {
            "stalled motion; carrying a decision forever feels safer than finishing it"
        }
    }
}

fn axis_hope(axis: AxisId) -> &'static str {
    match axis {
        AxisId::Cognitive => {
            "help making the account finally hold together, without being handed a verdict"
        }
        AxisId::Affective => "the feeling witnessed at its real size before anything else happens",
        AxisId::Proactive => "one step small enough to be theirs and nobody else's",
    }
}

fn level_to_priority(level: u8) -> PriorityLevel {
    if level >= 2 {
        PriorityLevel::Medium
    } else {
        PriorityLevel::Low
    }
}

fn priorities(seed: &Seed) -> AxisPriorities {
    let (c, a, p) = seed.levels;
    let mut pri = AxisPriorities::new(level_to_priority(c), level_to_priority(a), level_to_priority(p));
    pri.set(seed.axis, PriorityLevel::High);
    pri
}

fn assessment(seed: &Seed) -> IedrAssessment {
    let (c, a, p) = seed.levels;
    let level_for = |axis: AxisId| match axis {
        AxisId::Cognitive => c,
        AxisId::Affective => a,
        AxisId::Proactive => p,
    };
    let evidence_for = |axis: AxisId| match axis {
        AxisId::Cognitive => format!("card, in their words: \"{}\"", seed.vent),
        AxisId::Affective => format!("card, stated limits: \"{}\"", seed.wall),
        AxisId::Proactive => format!("card, precipitating event: \"{}\"", seed.spark),
    };
    let indicators = IndicatorId::ALL
        .into_iter()
        .map(|id| IedrIndicator {
            id,
            level: level_for(id.axis()),
            evidence: evidence_for(id.axis()),
            reasoning: String::new(),
        })
        .collect();
    IedrAssessment::new(indicators).expect("seed levels are in range")
}

fn build(seed: &Seed) -> Scenario {
    let first = first_name(seed.name);
    let social = match seed.ptype {
        PersonaType::Defensive => format!(
            "{first} runs the room before the room can run them: capable, wry, hard to catch \
             off guard, allergic to being the topic."
        ),
        PersonaType::Receptive => format!(
            "{first} is open about small things and quick to thank people, which hides how \
             rarely the big thing comes up."
        ),
    };
    let threshold = match (seed.ptype, seed.kind) {
        (PersonaType::Defensive, MechanismKind::Challenging) => EmpathyThreshold::High,
        (PersonaType::Defensive, MechanismKind::Routine) => EmpathyThreshold::Medium,
        (PersonaType::Receptive, _) => EmpathyThreshold::Low,
    };

    let card = PersonaCard {
        role_info: RoleInfo {
            name: seed.name.to_string(),
            gender: seed.gender.to_string(),
            age: seed.age,
        },
        role_traits: RoleTraits {
            social_persona: social,
            inner_core: format!("Beneath that: {}.", axis_drive(seed.axis)),
        },
        empathy_threshold: threshold,
        chat_topic: seed.topic.to_string(),
        empathy_needs: EmpathyNeeds {
            vent_content: seed.vent.to_string(),
            hoped_points: format!("{first} hopes for {}.", axis_hope(seed.axis)),
            threshold_constraints: seed.wall.to_string(),
        },
        empathy_priority: priorities(seed),
        past_experiences: PastExperiences {
            childhood: format!(
                "{first} grew up in a household where {} was never discussed at the table, so \
                 they learned to pre-package their troubles as anecdotes.",
                seed.domain.replace('_', " ")
            ),
            adolescence: format!(
                "By the school years {first} was already the reliable one, praised precisely \
                 for the performance that now makes honesty expensive."
            ),
            young_adulthood: format!(
                "The pattern hardened at the first jobs and first households: {first} handled \
                 things, and handled being the one who handles things."
            ),
            implicit_arc: format!(
                "What {first} cannot say yet: {} sits on top of an older fear of being found \
                 wanting, and the two have merged.",
                seed.topic
            ),
        },
        current_situation: CurrentSituation {
            circumstances: format!("{} {}", seed.vent, seed.spark),
            main_goal: format!(
                "{first} wants to get through {} without being rushed to a tidy ending.",
                seed.topic
            ),
            vision: format!(
                "On a good day {first} can imagine {} taking up a normal amount of room.",
                seed.topic
            ),
        },
        story: Story {
            trigger: seed.spark.to_string(),
            development: vec![
                format!("{first} mentioned it sideways, as a joke, and studied the reaction."),
                format!(
                    "A second attempt got closer before {first} apologized for the heaviness \
                     and changed lanes."
                ),
                format!("{first} started composing a longer message and deleted it twice."),
                format!("Late one evening {first} finally typed the unguarded version."),
            ],
            outcome: format!("{first} is circling the real subject now, in short passes."),
            epilogue: format!(
                "The version {first} tells no one: if {} goes unwitnessed much longer, it will \
                 calcify into who they are.",
                seed.topic
            ),
        },
    };

    let iedr = assessment(seed);
    let band = BandingParams::default().band(iedr.r0());

    Scenario {
        format: SCENARIO_FORMAT.to_string(),
        id: format!("synth-{:03}", seed.n),
        synthetic: true,
        persona: card,
        crisis_event: format!("{} The conversation opens in the aftermath.", seed.spark),
        labels: vec![
            TaggedLabel::primary(seed.topic.to_string()),
            TaggedLabel::secondary(format!("{} support first", seed.axis.short())),
            TaggedLabel::secondary(format!("{} persona", match seed.ptype {
                PersonaType::Defensive => "defensive",
                PersonaType::Receptive => "receptive",
            })),
        ],
        domain_label: seed.domain.to_string(),
        mechanism_label: Mechanism { axis: seed.axis, kind: seed.kind },
        persona_type: seed.ptype,
        iedr: Some(iedr),
        difficulty_band: Some(band),
    }
}

/// Build the full bundled corpus, ordered by id.
pub fn synthetic_corpus() -> Vec<Scenario> {
    SEEDS.iter().map(build).collect()
}
